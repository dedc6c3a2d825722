import { readFileSync } from 'node:fs';
import { describe, expect, it } from 'vitest';

import { applyEnvelope, initialViewState, replay } from '../src/state.js';
import { renderConsole } from '../src/render.js';
import type { Envelope } from '../src/types.js';

// Recorded from a live session: snapshot, state changes, phases, vitals
// (including one TooHard alert), battery drain, and a joint overheating.
const STREAM: Envelope[] = JSON.parse(
  readFileSync(new URL('./fixtures/envelopes.json', import.meta.url), 'utf8'),
);

function deepFreeze<T>(value: T): T {
  if (value && typeof value === 'object') {
    for (const key of Object.keys(value as object)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}

describe('envelope fold', () => {
  it('fixture starts with the snapshot envelope', () => {
    expect(STREAM[0]!.seq).toBe(1);
    expect(STREAM[0]!.topic).toBe('Snapshot');
    expect(STREAM.length).toBeGreaterThan(500);
  });

  it('replaying the recorded stream renders identically every time', () => {
    const first = renderConsole(replay(STREAM));
    const second = renderConsole(replay(STREAM));
    expect(second).toBe(first);

    // a serialization round trip of the recording must not change the render
    const reloaded: Envelope[] = JSON.parse(JSON.stringify(STREAM));
    expect(renderConsole(replay(reloaded))).toBe(first);
  });

  it('every prefix of the stream renders deterministically', () => {
    for (const cut of [1, 2, 10, 100, 350, STREAM.length]) {
      const prefix = STREAM.slice(0, cut);
      expect(renderConsole(replay(prefix))).toBe(renderConsole(replay(prefix)));
    }
  });

  it('never mutates its inputs', () => {
    const frozen = deepFreeze(JSON.parse(JSON.stringify(STREAM))) as Envelope[];
    let state = deepFreeze(initialViewState());
    for (const env of frozen) {
      state = deepFreeze(applyEnvelope(state, env));
    }
    expect(renderConsole(state)).toBe(renderConsole(replay(STREAM)));
  });

  it('tracks the stream contents faithfully', () => {
    const end = replay(STREAM);

    expect(end.connection.connected).toBe(true);
    expect(end.connection.lastSeq).toBe(STREAM.length);

    const lastBattery = [...STREAM].reverse().find((e) => e.topic === 'BatteryLevel')!;
    expect(end.robot.batteryPct).toBe(lastBattery.payload.battery_pct);

    const hotTopics = STREAM.filter((e) => e.topic === 'HotDeviceDetected');
    expect(hotTopics.length).toBeGreaterThan(0);
    for (const env of hotTopics) {
      expect(end.robot.hotJoints).toContain(env.payload.joint);
    }

    const lastVitals = [...STREAM].reverse().find((e) => e.topic === 'Vitals')!;
    expect(end.vitals.bpm).toBe(lastVitals.payload.bpm);
    expect(end.vitals.banner).not.toBeNull();
    expect(end.vitals.banner!.kind).toBe('TooHard');

    // the recording answers the only resolved question with "yes"
    const asked = STREAM.filter(
      (e) => e.topic === 'SessionEvent' && e.payload.kind === 'UnderstandingAsked',
    ).length;
    const answered = STREAM.filter(
      (e) => e.topic === 'SessionEvent' && e.payload.kind === 'UnderstandingAnswered',
    ).length;
    expect(end.session.pendingQuestion).toBe(asked > answered);
  });

  it('event seq feeds the resume cursor, envelope seq never regresses', () => {
    const end = replay(STREAM);
    const eventSeqs = STREAM.filter((e) => e.topic === 'SessionEvent').map(
      (e) => e.payload.seq as number,
    );
    expect(end.eventCursor).toBe(Math.max(...eventSeqs));

    // gap-filled events arrive as synthetic envelopes with seq 0
    const synthetic: Envelope = {
      seq: 0,
      topic: 'SessionEvent',
      t_server: 0,
      payload: { seq: end.eventCursor + 1, t_session_s: 0, kind: 'PhaseEnded', payload: { index: 99 } },
    };
    const after = applyEnvelope(end, synthetic);
    expect(after.connection.lastSeq).toBe(end.connection.lastSeq);
    expect(after.eventCursor).toBe(end.eventCursor + 1);
  });

  it('a hot joint stays HOT in the render until temperatures clear it', () => {
    const end = replay(STREAM);
    const hot = end.robot.hotJoints[0]!;
    expect(renderConsole(end)).toContain(`data-joint="${hot}">${hot}: HOT`);

    const cooled = applyEnvelope(end, {
      seq: end.connection.lastSeq + 1,
      topic: 'JointTemperatures',
      t_server: 0,
      payload: {
        t_sim_s: 0,
        joint_temp: Object.fromEntries(Object.keys(end.robot.jointTempU).map((j) => [j, 30])),
        hot_devices: [],
      },
    });
    expect(cooled.robot.hotJoints).toEqual([]);
    expect(renderConsole(cooled)).not.toContain('HOT');
  });
});
