import type { CatalogRecordWire } from './types.js';

// The catalog endpoint already filters to schedulable records, but the picker
// filters again so a stale or hand-fed record list can never surface an
// excluded exercise in the editor.
export function pickerOptions(
  records: CatalogRecordWire[],
  setting: string,
): CatalogRecordWire[] {
  return records
    .filter((r) => r.setting === setting && r.status === 'Final')
    .sort((a, b) => (a.display_name < b.display_name ? -1 : a.display_name > b.display_name ? 1 : 0));
}
