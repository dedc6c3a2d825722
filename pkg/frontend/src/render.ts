// Pure ConsoleViewState -> HTML string.  No clocks, no randomness, no DOM
// reads; rendering the same state twice yields byte-identical markup.

import type { ConsoleViewState } from './state.js';
import { ALL_CONTROLS, isEnabled } from './controls.js';
import type { PhaseWire } from './types.js';

// Joints at or above this register as "warm" on the indicator; HOT comes only
// from the robot's own hot-device detection, never a client-side threshold.
export const WARM_AT_U = 50;

const UPCOMING_LIMIT = 6;

const BUTTON_COLORS = ['red', 'green', 'blue', 'yellow'];

const CONTROL_LABELS: Record<string, string> = {
  start: 'Start',
  pause: 'Pause',
  resume: 'Resume',
  stop: 'Stop',
  reset: 'Reset',
  enter_chat: 'Chat',
  exit_chat: 'End chat',
};

export function esc(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function phaseLabel(p: PhaseWire, names: Record<string, string>): string {
  switch (p.kind) {
    case 'WarmupGame':
      return 'Warm-up game';
    case 'ShortBreak':
      return 'Short break';
    case 'LongBreak':
      return 'Long break';
    case 'Demonstration':
      return `Demo: ${names[p.exercise_id ?? ''] ?? p.exercise_id ?? '?'}`;
    case 'Performance':
      return `${names[p.exercise_id ?? ''] ?? p.exercise_id ?? '?'}`;
  }
}

function renderConnection(state: ConsoleViewState): string {
  const cls = state.connection.connected ? 'conn-ok' : 'conn-down';
  const text = state.connection.connected ? 'live' : 'reconnecting';
  return `<div id="connection" class="${cls}">${text} · seq ${state.connection.lastSeq}</div>`;
}

function renderControls(state: ConsoleViewState): string {
  const rows = ALL_CONTROLS.map((c) => {
    const on = isEnabled(state.session.state, c);
    return `<button class="ctl" data-control="${c}"${on ? '' : ' disabled'}>${CONTROL_LABELS[c]}</button>`;
  }).join('');
  const answer = state.session.pendingQuestion
    ? `<div id="answer-box"><span>Did the patient understand?</span>` +
      `<button class="ans" data-answer="yes">Yes</button>` +
      `<button class="ans" data-answer="no">No</button></div>`
    : '';
  return `<div id="controls">${rows}</div>${answer}`;
}

function renderSessionPanel(state: ConsoleViewState, names: Record<string, string>): string {
  const tl = state.timeline;
  const idx = state.session.phaseIndex;
  const current =
    tl && idx !== null && tl.phases[idx]
      ? phaseLabel(tl.phases[idx]!, names)
      : '-';
  let upcoming = '';
  if (tl && idx !== null) {
    const items = tl.phases
      .slice(idx + 1, idx + 1 + UPCOMING_LIMIT)
      .map((p) => `<li>${esc(phaseLabel(p, names))} (${p.duration_s}s)</li>`)
      .join('');
    upcoming = `<ol id="upcoming">${items}</ol>`;
  }
  const reps = Object.keys(state.session.repsByExercise)
    .sort()
    .map((ex) => `<span class="rep">${esc(names[ex] ?? ex)}: ${state.session.repsByExercise[ex]}</span>`)
    .join(' ');
  return (
    `<div id="session">` +
    `<div id="session-state" data-state="${state.session.state}">${state.session.state}</div>` +
    `<div id="current-phase">${esc(current)}</div>` +
    `<div id="phases-done">completed ${state.session.endedPhases.length}</div>` +
    upcoming +
    `<div id="reps">${reps}</div>` +
    `</div>`
  );
}

function heatClass(state: ConsoleViewState, joint: string): string {
  if (state.robot.hotJoints.includes(joint)) return 'hot';
  const u = state.robot.jointTempU[joint];
  return u !== undefined && u >= WARM_AT_U ? 'warm' : 'normal';
}

function renderFeedback(state: ConsoleViewState): string {
  const battery =
    state.robot.batteryPct === null
      ? '<div id="battery" class="gauge">battery ?</div>'
      : `<div id="battery" class="gauge"><div class="gauge-fill" style="width:${Math.round(
          state.robot.batteryPct,
        )}%"></div><span>battery ${Math.round(state.robot.batteryPct)}%</span></div>`;

  const joints = Object.keys(state.robot.jointTempU)
    .sort()
    .map((j) => {
      const cls = heatClass(state, j);
      const label = cls === 'hot' ? 'HOT' : cls;
      return `<span class="joint ${cls}" data-joint="${esc(j)}">${esc(j)}: ${label}</span>`;
    })
    .join(' ');

  const dots = BUTTON_COLORS.map((c) => {
    const linked = state.robot.buttons[c] === true;
    return `<span class="dot ${linked ? 'linked' : 'hollow'}" data-color="${c}" title="${c}"></span>`;
  }).join('');

  const heading =
    state.robot.headingDeg === null ? '?' : `${state.robot.headingDeg.toFixed(1)}°`;

  const bpm = state.vitals.bpm === null ? '-' : `${state.vitals.bpm}`;
  const banner = state.vitals.banner
    ? `<div id="vitals-banner" class="${state.vitals.banner.kind === 'TooHard' ? 'too-hard' : 'too-slow'}">${esc(
        state.vitals.banner.text,
      )}</div>`
    : '';

  const log = state.log.map((l) => `<li>${esc(l)}</li>`).join('');

  return (
    `<div id="feedback">` +
    battery +
    `<div id="joints">${joints}</div>` +
    `<div id="buttons-row">${dots}</div>` +
    `<div id="heading">heading ${heading}</div>` +
    `<div id="vitals">♥ ${bpm} bpm</div>` +
    banner +
    `<ul id="speech-log">${log}</ul>` +
    `</div>`
  );
}

export function renderConsole(
  state: ConsoleViewState,
  names: Record<string, string> = {},
): string {
  return (
    renderConnection(state) +
    renderControls(state) +
    renderSessionPanel(state, names) +
    renderFeedback(state)
  );
}
