// Bootstraps the console: one fold state, one WS channel, DOM event wiring.
// All rendering goes through renderConsole so the view stays a pure function
// of received envelopes.

import { api, ApiError, SessionChannel } from './api.js';
import type { Control } from './controls.js';
import {
  addEntry,
  emptyModel,
  fromDoc,
  localIssues,
  moveEntry,
  removeEntry,
  setDuration,
  toDoc,
  type EditorModel,
} from './editor.js';
import { pickerOptions } from './picker.js';
import { esc, renderConsole } from './render.js';
import {
  applyEnvelope,
  initialViewState,
  markDisconnected,
  type ConsoleViewState,
} from './state.js';
import type { CatalogRecordWire, Envelope } from './types.js';

const viewRoot = document.getElementById('view-root') as HTMLDivElement;
const editorRoot = document.getElementById('editor-root') as HTMLDivElement;
const regimenSelect = document.getElementById('regimen-select') as HTMLSelectElement;
const newSessionBtn = document.getElementById('new-session') as HTMLButtonElement;
const seedInput = document.getElementById('seed-input') as HTMLInputElement;
const settingSelect = document.getElementById('setting-select') as HTMLSelectElement;
const volumeSlider = document.getElementById('volume-slider') as HTMLInputElement;
const chatInput = document.getElementById('chat-input') as HTMLInputElement;
const chatSend = document.getElementById('chat-send') as HTMLButtonElement;
const toastHost = document.getElementById('toast-host') as HTMLDivElement;

let state: ConsoleViewState = initialViewState();
let channel: SessionChannel | null = null;
let names: Record<string, string> = {};
let catalogRecords: CatalogRecordWire[] = [];
let editor: EditorModel = emptyModel('InST');
let serverIssues: string[] = [];
let renderQueued = false;

function toast(message: string): void {
  const el = document.createElement('div');
  el.className = 'toast';
  el.textContent = message;
  toastHost.appendChild(el);
  setTimeout(() => el.remove(), 4000);
}

function scheduleRender(): void {
  if (renderQueued) return;
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    viewRoot.innerHTML = renderConsole(state, names);
  });
}

function onEnvelope(env: Envelope): void {
  state = applyEnvelope(state, env);
  scheduleRender();
}

async function resync(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const doc = await api.session(state.sessionId);
    onEnvelope({ seq: 0, topic: 'Snapshot', t_server: 0, payload: doc });
  } catch {
    toast('Session is gone');
  }
}

async function runControl(control: Control): Promise<void> {
  if (!state.sessionId) return;
  try {
    if (control === 'enter_chat') {
      // entering chat is implicit in the first message
      await sendChat();
    } else {
      const path = control === 'exit_chat' ? 'chat/exit' : control;
      await api.control(state.sessionId, path);
    }
  } catch (err) {
    if (err instanceof ApiError) {
      toast(err.body.message);
      await resync();
    }
  }
}

async function sendChat(): Promise<void> {
  if (!state.sessionId) return;
  const text = chatInput.value.trim() || 'Hello!';
  chatInput.value = '';
  const resp = await api.chat(state.sessionId, text);
  if (resp.degraded) toast('Chat service unreachable, built-in answers only');
}

viewRoot.addEventListener('click', (ev) => {
  const target = ev.target as HTMLElement;
  const control = target.getAttribute('data-control') as Control | null;
  if (control && !(target as HTMLButtonElement).disabled) {
    (target as HTMLButtonElement).disabled = true; // optimistic; render re-decides
    void runControl(control);
    return;
  }
  const answer = target.getAttribute('data-answer');
  if (answer === 'yes' || answer === 'no') {
    if (state.sessionId) {
      void api.answer(state.sessionId, answer).catch(async (err) => {
        if (err instanceof ApiError) {
          toast(err.body.message);
          await resync();
        }
      });
    }
  }
});

volumeSlider.addEventListener('change', () => {
  void api.setVolume(Number(volumeSlider.value)).catch((err) => {
    if (err instanceof ApiError) toast(err.body.message);
  });
});

chatSend.addEventListener('click', () => {
  void sendChat().catch((err) => {
    if (err instanceof ApiError) toast(err.body.message);
  });
});

// ---- session bootstrap ------------------------------------------------------

async function refreshRegimens(): Promise<void> {
  const docs = await api.regimens();
  regimenSelect.innerHTML = docs
    .map((d) => `<option value="${esc(d.id ?? '')}">${esc(d.name)}</option>`)
    .join('');
}

newSessionBtn.addEventListener('click', async () => {
  const regimenId = regimenSelect.value;
  if (!regimenId) return;
  channel?.close();
  try {
    const doc = await api.createSession(regimenId, Number(seedInput.value) || 0);
    state = initialViewState();
    onEnvelope({ seq: 0, topic: 'Snapshot', t_server: 0, payload: doc });
    channel = new SessionChannel(
      doc.session_id,
      onEnvelope,
      (status) => {
        if (status !== 'open') {
          state = markDisconnected(state);
          scheduleRender();
        }
      },
      () => state.eventCursor,
    );
    channel.connect();
  } catch (err) {
    if (err instanceof ApiError) toast(err.body.message);
  }
});

// ---- regimen editor ---------------------------------------------------------

function renderEditor(): void {
  const options = pickerOptions(catalogRecords, editor.setting);
  const picker = options
    .map((r) => `<option value="${esc(r.id)}">${esc(r.display_name)}</option>`)
    .join('');
  const rows = editor.entries
    .map((e, i) => {
      const name = names[e.exerciseId] ?? e.exerciseId;
      return (
        `<li class="entry-row" draggable="true" data-index="${i}">` +
        `<span class="grip">⋮⋮</span>` +
        `<span class="entry-name">${esc(name)}</span>` +
        `<input type="number" class="entry-duration" data-index="${i}" value="${e.durationS}" min="1" step="5"> s` +
        `<button class="row-up" data-index="${i}"${i === 0 ? ' disabled' : ''}>↑</button>` +
        `<button class="row-down" data-index="${i}"${i === editor.entries.length - 1 ? ' disabled' : ''}>↓</button>` +
        `<button class="row-del" data-index="${i}">✕</button>` +
        `</li>`
      );
    })
    .join('');
  const issues = localIssues(editor)
    .map((i) => i.message)
    .concat(serverIssues);
  const offline = !state.connection.connected && state.sessionId !== null;
  const saveDisabled = issues.length > 0 || offline ? ' disabled' : '';
  editorRoot.innerHTML =
    `<input id="regimen-name" placeholder="Regimen name" value="${esc(editor.name)}">` +
    `<div class="picker-row"><select id="exercise-picker">${picker}</select>` +
    `<button id="add-entry">Add</button></div>` +
    `<ul id="entry-list">${rows}</ul>` +
    `<div class="breaks-row">` +
    `short break <input id="short-break" type="number" value="${editor.shortBreakS}" min="1"> s · ` +
    `long break <input id="long-break" type="number" value="${editor.longBreakS}" min="1"> s · ` +
    `station <input id="station-size" type="number" value="${editor.stationSize}" min="1"> · ` +
    `<label><input id="warmup-game" type="checkbox"${editor.includeWarmupGame ? ' checked' : ''}> warm-up game</label>` +
    `</div>` +
    (offline ? `<div class="banner">Offline: cannot save</div>` : '') +
    (issues.length ? `<ul class="issues">${issues.map((m) => `<li>${esc(m)}</li>`).join('')}</ul>` : '') +
    `<button id="save-regimen"${saveDisabled}>Save regimen</button>`;
}

let dragFrom: number | null = null;

editorRoot.addEventListener('dragstart', (ev) => {
  const row = (ev.target as HTMLElement).closest('.entry-row') as HTMLElement | null;
  dragFrom = row ? Number(row.dataset.index) : null;
});
editorRoot.addEventListener('dragover', (ev) => ev.preventDefault());
editorRoot.addEventListener('drop', (ev) => {
  ev.preventDefault();
  const row = (ev.target as HTMLElement).closest('.entry-row') as HTMLElement | null;
  if (row && dragFrom !== null) {
    editor = moveEntry(editor, dragFrom, Number(row.dataset.index));
    renderEditor();
  }
  dragFrom = null;
});

editorRoot.addEventListener('click', (ev) => {
  const target = ev.target as HTMLElement;
  const idx = Number(target.getAttribute('data-index'));
  if (target.id === 'add-entry') {
    const picker = document.getElementById('exercise-picker') as HTMLSelectElement;
    const rec = catalogRecords.find((r) => r.id === picker.value);
    if (rec) {
      editor = addEntry(editor, rec.id, rec.default_duration_s);
      renderEditor();
    }
  } else if (target.classList.contains('row-del')) {
    editor = removeEntry(editor, idx);
    renderEditor();
  } else if (target.classList.contains('row-up')) {
    editor = moveEntry(editor, idx, idx - 1);
    renderEditor();
  } else if (target.classList.contains('row-down')) {
    editor = moveEntry(editor, idx, idx + 1);
    renderEditor();
  } else if (target.id === 'save-regimen') {
    void saveRegimen();
  }
});

editorRoot.addEventListener('change', (ev) => {
  const target = ev.target as HTMLInputElement;
  if (target.classList.contains('entry-duration')) {
    editor = setDuration(editor, Number(target.dataset.index), Number(target.value));
  } else if (target.id === 'regimen-name') {
    editor = { ...editor, name: target.value };
  } else if (target.id === 'short-break') {
    editor = { ...editor, shortBreakS: Number(target.value) };
  } else if (target.id === 'long-break') {
    editor = { ...editor, longBreakS: Number(target.value) };
  } else if (target.id === 'station-size') {
    editor = { ...editor, stationSize: Number(target.value) };
  } else if (target.id === 'warmup-game') {
    editor = { ...editor, includeWarmupGame: target.checked };
  }
  renderEditor();
});

async function saveRegimen(): Promise<void> {
  serverIssues = [];
  try {
    const saved = await api.saveRegimen(toDoc(editor));
    editor = fromDoc(saved);
    toast(`Saved "${saved.name}"`);
    await refreshRegimens();
  } catch (err) {
    if (err instanceof ApiError) {
      serverIssues = (err.body.violations ?? []).map((v) =>
        v.exercise_id ? `${v.message} (${v.exercise_id})` : v.message,
      );
      if (!serverIssues.length) serverIssues = [err.body.message];
    }
  }
  renderEditor();
}

settingSelect.addEventListener('change', async () => {
  editor = emptyModel(settingSelect.value);
  catalogRecords = await api.catalog(settingSelect.value);
  for (const r of catalogRecords) names[r.id] = r.display_name;
  renderEditor();
});

async function boot(): Promise<void> {
  catalogRecords = await api.catalog(editor.setting);
  names = {};
  for (const r of catalogRecords) names[r.id] = r.display_name;
  await refreshRegimens();
  renderEditor();
  scheduleRender();
}

void boot();
