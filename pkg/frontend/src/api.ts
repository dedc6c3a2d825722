// REST helpers and the WS channel with gap-filling reconnect.

import type {
  ApiErrorWire,
  CatalogRecordWire,
  Envelope,
  RegimenDocWire,
  SessionDocWire,
  SessionEventWire,
} from './types.js';

export class ApiError extends Error {
  constructor(public body: ApiErrorWire) {
    super(body.message);
  }
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  const resp = await fetch(path, {
    method,
    headers: body === undefined ? undefined : { 'content-type': 'application/json' },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await resp.text();
  const data = text ? JSON.parse(text) : null;
  if (!resp.ok) throw new ApiError(data as ApiErrorWire);
  return data as T;
}

export const api = {
  catalog: (setting: string) =>
    request<CatalogRecordWire[]>('GET', `/api/catalog?setting=${encodeURIComponent(setting)}`),
  regimens: () => request<RegimenDocWire[]>('GET', '/api/regimens'),
  saveRegimen: (doc: RegimenDocWire) =>
    doc.id
      ? request<RegimenDocWire>('PUT', `/api/regimens/${doc.id}`, doc)
      : request<RegimenDocWire>('POST', '/api/regimens', doc),
  createSession: (regimenId: string, seed: number) =>
    request<SessionDocWire>('POST', '/api/sessions', { regimen_id: regimenId, seed }),
  session: (id: string) => request<SessionDocWire>('GET', `/api/sessions/${id}`),
  control: (id: string, op: string) =>
    request<unknown>('POST', `/api/sessions/${id}/${op}`),
  answer: (id: string, answer: 'yes' | 'no') =>
    request<unknown>('POST', `/api/sessions/${id}/answer`, { answer }),
  chat: (id: string, text: string) =>
    request<{ reply: string; degraded: boolean; state: string }>(
      'POST',
      `/api/sessions/${id}/chat`,
      { text },
    ),
  events: (id: string, sinceSeq: number) =>
    request<{ events: SessionEventWire[] }>(
      'GET',
      `/api/sessions/${id}/events?since_seq=${sinceSeq}`,
    ),
  setVolume: (level: number) => request<unknown>('POST', '/api/robot/volume', { level }),
};

export type ChannelStatus = 'connecting' | 'open' | 'reconnecting';

// One WS connection per console.  On drop: mark reconnecting, page missed
// session events over REST (since_seq from the fold's cursor), then reopen;
// the fresh connection leads with a Snapshot envelope that resyncs the rest.
export class SessionChannel {
  private ws: WebSocket | null = null;
  private closed = false;
  private attempts = 0;

  constructor(
    private sessionId: string,
    private onEnvelope: (env: Envelope) => void,
    private onStatus: (status: ChannelStatus) => void,
    private eventCursor: () => number,
  ) {}

  connect(): void {
    const proto = location.protocol === 'https:' ? 'wss' : 'ws';
    this.onStatus(this.attempts === 0 ? 'connecting' : 'reconnecting');
    this.ws = new WebSocket(`${proto}://${location.host}/ws?session=${this.sessionId}`);
    this.ws.onopen = () => {
      this.attempts = 0;
      this.onStatus('open');
    };
    this.ws.onmessage = (ev) => {
      try {
        this.onEnvelope(JSON.parse(ev.data) as Envelope);
      } catch {
        // a malformed frame is the server's bug, not a reason to kill the UI
      }
    };
    this.ws.onclose = () => {
      if (!this.closed) this.reconnect();
    };
  }

  private reconnect(): void {
    this.onStatus('reconnecting');
    const delay = Math.min(500 * 2 ** this.attempts, 8000);
    this.attempts += 1;
    setTimeout(async () => {
      if (this.closed) return;
      try {
        const { events } = await api.events(this.sessionId, this.eventCursor());
        for (const ev of events) {
          this.onEnvelope({ seq: 0, topic: 'SessionEvent', t_server: 0, payload: ev });
        }
      } catch {
        // the session may be gone; the reopened WS will say so
      }
      this.connect();
    }, delay);
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
