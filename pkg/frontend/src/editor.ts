// Regimen editor model.  Pure operations over a plain object so reorder and
// validation round-trip in tests without a DOM.

import type { RegimenDocWire } from './types.js';

export interface EditorEntry {
  exerciseId: string;
  durationS: number;
}

export interface EditorModel {
  id: string | null; // null until first save
  name: string;
  setting: string;
  entries: EditorEntry[];
  shortBreakS: number;
  longBreakS: number;
  stationSize: number;
  includeWarmupGame: boolean;
}

export function emptyModel(setting: string): EditorModel {
  return {
    id: null,
    name: '',
    setting,
    entries: [],
    shortBreakS: 30,
    longBreakS: 30,
    stationSize: 4,
    includeWarmupGame: false,
  };
}

export function fromDoc(doc: RegimenDocWire): EditorModel {
  return {
    id: doc.id ?? null,
    name: doc.name,
    setting: doc.setting,
    entries: doc.entries.map((e) => ({ exerciseId: e.exercise_id, durationS: e.duration_s })),
    shortBreakS: doc.short_break_s,
    longBreakS: doc.long_break_s,
    stationSize: doc.station_size,
    includeWarmupGame: doc.include_warmup_game,
  };
}

export function addEntry(m: EditorModel, exerciseId: string, durationS: number): EditorModel {
  return { ...m, entries: [...m.entries, { exerciseId, durationS }] };
}

export function removeEntry(m: EditorModel, index: number): EditorModel {
  return { ...m, entries: m.entries.filter((_, i) => i !== index) };
}

export function setDuration(m: EditorModel, index: number, durationS: number): EditorModel {
  return {
    ...m,
    entries: m.entries.map((e, i) => (i === index ? { ...e, durationS } : e)),
  };
}

// Move the entry at `from` so it lands at `to`; out-of-range indexes are a
// no-op rather than an error because drag targets can race row removal.
export function moveEntry(m: EditorModel, from: number, to: number): EditorModel {
  const n = m.entries.length;
  if (from < 0 || from >= n || to < 0 || to >= n || from === to) return m;
  const entries = [...m.entries];
  const moved = entries.splice(from, 1)[0]!;
  entries.splice(to, 0, moved);
  return { ...m, entries };
}

export interface EditorIssue {
  field: string;
  message: string;
}

// Client-side checks cover only what the therapist can see and fix inline;
// everything else (exclusions, setting mismatches) is the server's verdict.
export function localIssues(m: EditorModel): EditorIssue[] {
  const issues: EditorIssue[] = [];
  if (!m.name.trim()) issues.push({ field: 'name', message: 'Name the regimen' });
  if (m.entries.length === 0) issues.push({ field: 'entries', message: 'Add at least one exercise' });
  m.entries.forEach((e, i) => {
    if (!(e.durationS > 0)) {
      issues.push({ field: `entries.${i}`, message: `Duration must be positive (${e.exerciseId})` });
    }
  });
  if (!(m.shortBreakS > 0)) issues.push({ field: 'shortBreakS', message: 'Short break must be positive' });
  if (!(m.longBreakS > 0)) issues.push({ field: 'longBreakS', message: 'Long break must be positive' });
  if (!(m.stationSize >= 1)) issues.push({ field: 'stationSize', message: 'Station size must be at least 1' });
  return issues;
}

export function toDoc(m: EditorModel): RegimenDocWire {
  const doc: RegimenDocWire = {
    schema_version: 1,
    name: m.name,
    setting: m.setting,
    entries: m.entries.map((e) => ({ exercise_id: e.exerciseId, duration_s: e.durationS })),
    short_break_s: m.shortBreakS,
    long_break_s: m.longBreakS,
    station_size: m.stationSize,
    include_warmup_game: m.includeWarmupGame,
  };
  if (m.id) doc.id = m.id;
  return doc;
}
