// The console's entire view is a fold over received envelopes.  applyEnvelope
// never mutates its input and never consults a clock, so replaying a recorded
// stream reproduces the exact same state (and therefore the same render).

import type {
  Envelope,
  SessionDocWire,
  SessionEventWire,
  SessionStateName,
  TimelineWire,
} from './types.js';

export interface VitalsBanner {
  kind: 'TooHard' | 'TooSlow';
  text: string;
}

export interface ConsoleViewState {
  connection: { connected: boolean; lastSeq: number };
  sessionId: string | null;
  regimenId: string | null;
  session: {
    state: SessionStateName;
    phaseIndex: number | null;
    endedPhases: number[]; // distinct, ascending
    pendingQuestion: boolean;
    repsByExercise: Record<string, number>;
  };
  timeline: TimelineWire | null;
  eventCursor: number; // last session-event seq, feeds since_seq on reconnect
  robot: {
    batteryPct: number | null;
    jointTempU: Record<string, number>;
    hotJoints: string[];
    headingDeg: number | null;
    buttons: Record<string, boolean>;
  };
  vitals: { bpm: number | null; banner: VitalsBanner | null };
  log: string[]; // most recent spoken lines, oldest first
}

const LOG_LINES = 8;

export function initialViewState(): ConsoleViewState {
  return {
    connection: { connected: false, lastSeq: 0 },
    sessionId: null,
    regimenId: null,
    session: {
      state: 'Idle',
      phaseIndex: null,
      endedPhases: [],
      pendingQuestion: false,
      repsByExercise: {},
    },
    timeline: null,
    eventCursor: 0,
    robot: {
      batteryPct: null,
      jointTempU: {},
      hotJoints: [],
      headingDeg: null,
      buttons: {},
    },
    vitals: { bpm: null, banner: null },
    log: [],
  };
}

function pushLog(log: string[], line: string): string[] {
  const next = log.concat(line);
  return next.length > LOG_LINES ? next.slice(next.length - LOG_LINES) : next;
}

function applySnapshot(state: ConsoleViewState, doc: SessionDocWire): ConsoleViewState {
  const snap = doc.snapshot;
  const tel = doc.telemetry;
  return {
    ...state,
    connection: { ...state.connection, connected: true },
    sessionId: doc.session_id,
    regimenId: doc.regimen_id,
    session: {
      state: snap.state,
      phaseIndex: snap.phase_index,
      // the snapshot carries only the count; keep known indices on a resync
      // of the same session, otherwise start fresh
      endedPhases: doc.session_id === state.sessionId ? state.session.endedPhases : [],
      pendingQuestion: snap.pending_question,
      repsByExercise: { ...snap.reps_by_exercise },
    },
    timeline: doc.timeline,
    robot: tel
      ? {
          batteryPct: tel.battery_pct,
          jointTempU: { ...tel.joint_temp },
          hotJoints: [...tel.hot_devices],
          headingDeg: tel.heading_deg,
          buttons: { ...tel.buttons_connected },
        }
      : state.robot,
  };
}

function applyEvent(state: ConsoleViewState, ev: SessionEventWire): ConsoleViewState {
  const next: ConsoleViewState = {
    ...state,
    session: { ...state.session },
    vitals: { ...state.vitals },
    eventCursor: Math.max(state.eventCursor, ev.seq),
  };
  const p = ev.payload;
  switch (ev.kind) {
    case 'StateChanged':
      next.session.state = p.to;
      if (p.to === 'Idle') {
        next.session.phaseIndex = null;
        next.session.endedPhases = [];
        next.session.pendingQuestion = false;
      }
      break;
    case 'PhaseStarted':
      next.session.phaseIndex = p.index;
      break;
    case 'PhaseEnded':
      if (!state.session.endedPhases.includes(p.index)) {
        next.session.endedPhases = [...state.session.endedPhases, p.index].sort(
          (a, b) => a - b,
        );
      }
      break;
    case 'UnderstandingAsked':
      next.session.pendingQuestion = true;
      break;
    case 'UnderstandingAnswered':
      next.session.pendingQuestion = false;
      break;
    case 'RepCounted':
      next.session.repsByExercise = {
        ...state.session.repsByExercise,
        [p.exercise_id]: (state.session.repsByExercise[p.exercise_id] ?? 0) + 1,
      };
      break;
    case 'VitalsAlert':
      next.vitals.banner = { kind: p.kind, text: p.text };
      next.vitals.bpm = p.bpm;
      break;
    case 'HotDeviceAlert':
      if (!state.robot.hotJoints.includes(p.joint)) {
        next.robot = { ...state.robot, hotJoints: [...state.robot.hotJoints, p.joint] };
      }
      break;
    case 'UtteranceSpoken':
    case 'TimeAnnouncement':
    case 'EncouragementTriggered':
      next.log = pushLog(state.log, p.text);
      break;
    case 'HeadingCorrected':
      next.log = pushLog(state.log, 'Heading corrected after stand-up');
      break;
    case 'ButtonRound':
      next.log = pushLog(
        state.log,
        p.skipped
          ? 'Button round skipped (buttons disconnected)'
          : `Button round: ${p.target_color} -> ${p.pressed_color ?? 'no press'} (+${p.score})`,
      );
      break;
    default:
      break;
  }
  return next;
}

export function applyEnvelope(state: ConsoleViewState, env: Envelope): ConsoleViewState {
  const base: ConsoleViewState = {
    ...state,
    connection: {
      connected: state.connection.connected,
      // synthesized gap-fill envelopes carry seq 0; never regress
      lastSeq: Math.max(state.connection.lastSeq, env.seq),
    },
  };
  switch (env.topic) {
    case 'Snapshot':
      return applySnapshot(base, env.payload as SessionDocWire);
    case 'SessionEvent':
      return applyEvent(base, env.payload as SessionEventWire);
    case 'BatteryLevel':
      return { ...base, robot: { ...base.robot, batteryPct: env.payload.battery_pct } };
    case 'JointTemperatures':
      return {
        ...base,
        robot: {
          ...base.robot,
          jointTempU: { ...env.payload.joint_temp },
          hotJoints: [...env.payload.hot_devices],
        },
      };
    case 'HotDeviceDetected':
      if (base.robot.hotJoints.includes(env.payload.joint)) return base;
      return {
        ...base,
        robot: { ...base.robot, hotJoints: [...base.robot.hotJoints, env.payload.joint] },
      };
    case 'Heading':
      return { ...base, robot: { ...base.robot, headingDeg: env.payload.heading_deg } };
    case 'ButtonLinkStatus':
      return {
        ...base,
        robot: { ...base.robot, buttons: { ...env.payload.buttons_connected } },
      };
    case 'Vitals':
      return { ...base, vitals: { ...base.vitals, bpm: env.payload.bpm } };
    default:
      return base;
  }
}

export function replay(envelopes: Envelope[]): ConsoleViewState {
  let state = initialViewState();
  for (const env of envelopes) state = applyEnvelope(state, env);
  return state;
}

export function markDisconnected(state: ConsoleViewState): ConsoleViewState {
  return { ...state, connection: { ...state.connection, connected: false } };
}
