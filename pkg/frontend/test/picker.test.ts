import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { pickerOptions } from '../src/picker.js';
import type { CatalogRecordWire } from '../src/types.js';

// The shipped catalog, exclusions included, exactly what a stale cache or a
// future unfiltered endpoint could hand the editor.
const CATALOG: { exercises: CatalogRecordWire[] } = JSON.parse(
  readFileSync(new URL('../../src/robocoach/data/catalog.json', import.meta.url), 'utf8'),
);

describe('exercise picker', () => {
  it('the raw catalog does contain excluded records (test would be vacuous otherwise)', () => {
    const toeCurling = CATALOG.exercises.find((r) => r.id === 'toe_curling');
    expect(toeCurling).toBeDefined();
    expect(toeCurling!.setting).toBe('InPT');
    expect(toeCurling!.status).not.toBe('Final');
  });

  it('never offers toe_curling for InPT', () => {
    const options = pickerOptions(CATALOG.exercises, 'InPT');
    expect(options.map((o) => o.id)).not.toContain('toe_curling');
  });

  it('offers only Final records of the requested setting', () => {
    for (const setting of ['InST', 'InPT', 'OutPT']) {
      const options = pickerOptions(CATALOG.exercises, setting);
      expect(options.length).toBeGreaterThan(0);
      for (const o of options) {
        expect(o.setting).toBe(setting);
        expect(o.status).toBe('Final');
      }
    }
  });

  it('matches the known schedulable counts per setting', () => {
    expect(pickerOptions(CATALOG.exercises, 'InST').length).toBe(18);
    expect(pickerOptions(CATALOG.exercises, 'InPT').length).toBe(13);
    expect(pickerOptions(CATALOG.exercises, 'OutPT').length).toBe(25);
  });

  it('sorts by display name for a stable menu', () => {
    const names = pickerOptions(CATALOG.exercises, 'InST').map((o) => o.display_name);
    expect(names).toEqual([...names].sort());
  });
});
