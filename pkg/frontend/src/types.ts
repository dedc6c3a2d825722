// Wire types for the documented REST + WS surface.  Field names mirror the
// server payloads exactly; the console never invents its own session state.

export type SessionStateName =
  | 'Idle'
  | 'PreChat'
  | 'Running'
  | 'Paused'
  | 'Stopped'
  | 'Completed'
  | 'PostChat';

export interface Envelope {
  seq: number;
  topic: string;
  t_server: number;
  payload: any;
}

export interface SessionEventWire {
  seq: number;
  t_session_s: number;
  kind: string;
  payload: Record<string, any>;
}

export interface PhaseWire {
  kind: 'WarmupGame' | 'Demonstration' | 'Performance' | 'ShortBreak' | 'LongBreak';
  duration_s: number;
  start_s: number;
  exercise_id: string | null;
}

export interface TimelineWire {
  regimen_id: string;
  phases: PhaseWire[];
  total_duration_s: number;
}

export interface SnapshotWire {
  state: SessionStateName;
  phase_index: number | null;
  t_session_s: number;
  phases_completed: number;
  reps_by_exercise: Record<string, number>;
  alerts: { hot_device: number; too_hard: number; too_slow: number };
  pending_question: boolean;
}

export interface TelemetryFrameWire {
  t_sim_s: number;
  battery_pct: number;
  joint_temp: Record<string, number>;
  hot_devices: string[];
  heading_deg: number;
  buttons_connected: Record<string, boolean>;
}

export interface SessionDocWire {
  session_id: string;
  regimen_id: string;
  snapshot: SnapshotWire;
  timeline: TimelineWire;
  telemetry: TelemetryFrameWire | null;
}

export interface CatalogRecordWire {
  id: string;
  display_name: string;
  setting: string;
  category: string;
  position: string;
  default_duration_s: number;
  status: string;
}

export interface RegimenDocWire {
  schema_version: number;
  id?: string;
  name: string;
  setting: string;
  entries: { exercise_id: string; duration_s: number }[];
  short_break_s: number;
  long_break_s: number;
  station_size: number;
  include_warmup_game: boolean;
  created_at?: string;
  updated_at?: string;
}

export interface ViolationWire {
  kind: string;
  message: string;
  exercise_id?: string;
}

export interface ApiErrorWire {
  code: string;
  message: string;
  http_status: number;
  violations?: ViolationWire[];
}
