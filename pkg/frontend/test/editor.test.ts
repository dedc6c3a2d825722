import { describe, expect, it } from 'vitest';

import {
  addEntry,
  emptyModel,
  fromDoc,
  localIssues,
  moveEntry,
  setDuration,
  toDoc,
} from '../src/editor.js';

function model() {
  let m = emptyModel('InST');
  m = { ...m, name: 'Morning circuit' };
  m = addEntry(m, 'boxing', 60);
  m = addEntry(m, 'squat', 45);
  m = addEntry(m, 'lunge', 30);
  return m;
}

describe('regimen editor model', () => {
  it('reorder round-trips into the saved document', () => {
    const reordered = moveEntry(model(), 2, 0); // lunge to the front
    expect(reordered.entries.map((e) => e.exerciseId)).toEqual(['lunge', 'boxing', 'squat']);

    const doc = toDoc(reordered);
    expect(doc.entries.map((e) => e.exercise_id)).toEqual(['lunge', 'boxing', 'squat']);
    expect(doc.entries.map((e) => e.duration_s)).toEqual([30, 60, 45]);

    // and back out of a server response
    expect(fromDoc({ ...doc, id: 'r1' }).entries).toEqual(reordered.entries);
  });

  it('out-of-range moves are no-ops', () => {
    const m = model();
    expect(moveEntry(m, 0, 5)).toBe(m);
    expect(moveEntry(m, -1, 0)).toBe(m);
    expect(moveEntry(m, 1, 1)).toBe(m);
  });

  it('zero duration raises an inline issue naming the exercise', () => {
    const m = setDuration(model(), 1, 0);
    const issues = localIssues(m);
    expect(issues.some((i) => i.field === 'entries.1' && i.message.includes('squat'))).toBe(true);
  });

  it('a fresh model is not saveable yet', () => {
    const issues = localIssues(emptyModel('InPT'));
    expect(issues.map((i) => i.field)).toContain('name');
    expect(issues.map((i) => i.field)).toContain('entries');
  });

  it('a complete model passes and serializes with editor defaults', () => {
    const m = model();
    expect(localIssues(m)).toEqual([]);
    const doc = toDoc(m);
    expect(doc.short_break_s).toBe(30);
    expect(doc.long_break_s).toBe(30);
    expect(doc.station_size).toBe(4);
    expect(doc.include_warmup_game).toBe(false);
    expect(doc.id).toBeUndefined();
  });
});
