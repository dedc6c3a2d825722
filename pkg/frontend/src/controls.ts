// Which control may fire in which session state.  This mirrors the engine's
// transition table; the console must never issue a request the state forbids.

import type { SessionStateName } from './types.js';

export type Control =
  | 'start'
  | 'pause'
  | 'resume'
  | 'stop'
  | 'reset'
  | 'enter_chat'
  | 'exit_chat';

export const ALL_CONTROLS: readonly Control[] = [
  'start',
  'pause',
  'resume',
  'stop',
  'reset',
  'enter_chat',
  'exit_chat',
];

const TABLE: Record<SessionStateName, readonly Control[]> = {
  Idle: ['start', 'enter_chat'],
  PreChat: ['start', 'exit_chat'],
  Running: ['pause', 'stop'],
  Paused: ['resume', 'stop'],
  Stopped: ['reset'],
  Completed: ['enter_chat'],
  PostChat: ['exit_chat'],
};

export function enabledControls(state: SessionStateName): ReadonlySet<Control> {
  return new Set(TABLE[state]);
}

export function isEnabled(state: SessionStateName, control: Control): boolean {
  return TABLE[state].includes(control);
}
