/**
 * Session state as a pure reducer over an action log.
 *
 * Every transition (user edits and service responses alike) is an Action, so
 * replaying the log from the initial state reproduces the session exactly.
 * That is what makes scripted UI tests possible.
 */

import {
  ATTRIBUTES,
  GEOMETRIC,
  type Attribute,
  type Background,
  type Draft,
  type FieldError,
  type Lock,
  type MetaPayload,
  type Mode,
  type PredictPayload,
  type SamplePayload,
} from "./types.js";

export interface Grid {
  samples: number[][][];
  clusters: Record<string, number[]>;
  svgs: string[];
  seed: number;
  requestId: number;
}

export interface SessionState {
  meta: MetaPayload | null;
  draft: Draft;
  nextBoxId: number;
  sliders: Record<Attribute, number>;
  mode: Mode;
  n: number;
  seed: number;
  locks: Lock[];
  prediction: PredictPayload | null;
  grid: Grid | null;
  error: string | null;
  /** id of the one in-flight sample request, null when idle */
  inflight: number | null;
}

export type Action =
  | { kind: "meta_received"; meta: MetaPayload }
  | { kind: "boot_failed"; message: string }
  | { kind: "add_box"; text: string; cx: number; cy: number }
  | { kind: "move_box"; id: number; cx: number; cy: number }
  | { kind: "set_text"; id: number; text: string }
  | { kind: "delete_box"; id: number }
  | { kind: "set_canvas"; width: number; height: number }
  | { kind: "set_background"; background: Background | null }
  | { kind: "set_slider"; attribute: Attribute; p: number }
  | { kind: "set_mode"; mode: Mode }
  | { kind: "set_n"; n: number }
  | { kind: "set_seed"; seed: number }
  | { kind: "set_lock"; lock: Lock }
  | { kind: "clear_lock"; attribute: Attribute; cluster: number }
  | { kind: "request_started"; requestId: number }
  | { kind: "prediction_received"; requestId: number; payload: PredictPayload }
  | { kind: "samples_received"; requestId: number; payload: SamplePayload; seed: number }
  | { kind: "request_failed"; requestId: number; message: string };

function defaultSliders(): Record<Attribute, number> {
  const out = {} as Record<Attribute, number>;
  for (const a of ATTRIBUTES) out[a] = GEOMETRIC.has(a) ? 0.1 : 0.9;
  return out;
}

export function initialState(): SessionState {
  return {
    meta: null,
    draft: { canvasWidth: 600, canvasHeight: 750, background: null, boxes: [] },
    nextBoxId: 1,
    sliders: defaultSliders(),
    mode: "structure_preserved",
    n: 6,
    seed: 0,
    locks: [],
    prediction: null,
    grid: null,
    error: null,
    inflight: null,
  };
}

/** Cluster ids present in a /predict response for one attribute. */
function clusterIds(prediction: PredictPayload, attribute: Attribute): Set<number> {
  return new Set(prediction.clusters[attribute] ?? []);
}

export function reduce(state: SessionState, action: Action): SessionState {
  switch (action.kind) {
    case "meta_received":
      return { ...state, meta: action.meta };

    case "boot_failed":
      return { ...state, error: action.message };

    case "add_box": {
      if (state.draft.boxes.length >= 50) return state;
      const box = { id: state.nextBoxId, text: action.text, cx: action.cx, cy: action.cy };
      return {
        ...state,
        nextBoxId: state.nextBoxId + 1,
        draft: { ...state.draft, boxes: [...state.draft.boxes, box] },
      };
    }

    case "move_box":
      return {
        ...state,
        draft: {
          ...state.draft,
          boxes: state.draft.boxes.map((b) =>
            b.id === action.id ? { ...b, cx: action.cx, cy: action.cy } : b,
          ),
        },
      };

    case "set_text":
      return {
        ...state,
        draft: {
          ...state.draft,
          boxes: state.draft.boxes.map((b) =>
            b.id === action.id ? { ...b, text: action.text } : b,
          ),
        },
      };

    case "delete_box":
      return {
        ...state,
        draft: { ...state.draft, boxes: state.draft.boxes.filter((b) => b.id !== action.id) },
      };

    case "set_canvas":
      return {
        ...state,
        draft: { ...state.draft, canvasWidth: action.width, canvasHeight: action.height },
      };

    case "set_background":
      return { ...state, draft: { ...state.draft, background: action.background } };

    case "set_slider": {
      // invariant: sliders stay within (0, 1]; out-of-range values are ignored
      if (!(action.p > 0 && action.p <= 1)) return state;
      return { ...state, sliders: { ...state.sliders, [action.attribute]: action.p } };
    }

    case "set_mode":
      return { ...state, mode: action.mode };

    case "set_n": {
      if (!Number.isInteger(action.n) || action.n < 1 || action.n > 64) return state;
      return { ...state, n: action.n };
    }

    case "set_seed":
      return { ...state, seed: action.seed };

    case "set_lock": {
      // locks must reference clusters from the latest prediction
      if (!state.prediction) return state;
      if (!clusterIds(state.prediction, action.lock.attribute).has(action.lock.cluster)) {
        return state;
      }
      const rest = state.locks.filter(
        (l) => !(l.attribute === action.lock.attribute && l.cluster === action.lock.cluster),
      );
      return { ...state, locks: [...rest, action.lock] };
    }

    case "clear_lock":
      return {
        ...state,
        locks: state.locks.filter(
          (l) => !(l.attribute === action.attribute && l.cluster === action.cluster),
        ),
      };

    case "request_started":
      // a newer request supersedes whatever was in flight
      return { ...state, inflight: action.requestId, error: null };

    case "prediction_received": {
      if (action.requestId !== state.inflight) return state; // stale
      const prediction = action.payload;
      const locks = state.locks.filter((l) =>
        clusterIds(prediction, l.attribute).has(l.cluster),
      );
      return { ...state, prediction, locks };
    }

    case "samples_received": {
      if (action.requestId !== state.inflight) return state; // stale
      return {
        ...state,
        inflight: null,
        error: null,
        grid: {
          samples: action.payload.samples,
          clusters: action.payload.clusters,
          svgs: action.payload.svgs,
          seed: action.seed,
          requestId: action.requestId,
        },
      };
    }

    case "request_failed": {
      if (action.requestId !== state.inflight) return state; // stale
      return { ...state, inflight: null, error: action.message };
    }
  }
}

export function replay(actions: readonly Action[]): SessionState {
  return actions.reduce(reduce, initialState());
}

/** Draft schema check mirroring the service's wire model; runs before any request. */
export function validateDraft(draft: Draft): FieldError[] {
  const errors: FieldError[] = [];
  const intDim = (v: number) => Number.isInteger(v) && v >= 1 && v <= 10000;
  if (!intDim(draft.canvasWidth)) {
    errors.push({ field: "canvas.width", message: "must be an integer in 1..10000" });
  }
  if (!intDim(draft.canvasHeight)) {
    errors.push({ field: "canvas.height", message: "must be an integer in 1..10000" });
  }
  if (draft.boxes.length < 1) {
    errors.push({ field: "elements", message: "at least one text box required" });
  }
  if (draft.boxes.length > 50) {
    errors.push({ field: "elements", message: "at most 50 text boxes" });
  }
  for (const box of draft.boxes) {
    if (box.text.length < 1) {
      errors.push({ field: `box ${box.id} text`, message: "must not be empty" });
    }
    if (!Number.isFinite(box.cx) || !Number.isFinite(box.cy)) {
      errors.push({ field: `box ${box.id} position`, message: "must be finite" });
    }
  }
  return errors;
}

export function canSample(state: SessionState): boolean {
  return state.inflight === null && validateDraft(state.draft).length === 0;
}

/**
 * Raster-scan positions, matching the server's ordering rule: sort by
 * (top, left, request index) where the corner of an extent-less box is its
 * center. Returns rank per box, aligned with draft.boxes.
 */
export function rasterRanks(draft: Draft): number[] {
  const keyed = draft.boxes.map((b, i) => ({ top: b.cy, left: b.cx, i }));
  keyed.sort((a, b) => a.top - b.top || a.left - b.left || a.i - b.i);
  const ranks = new Array<number>(draft.boxes.length);
  keyed.forEach((k, pos) => {
    ranks[k.i] = pos;
  });
  return ranks;
}

export interface Store {
  state(): SessionState;
  log(): readonly Action[];
  dispatch(action: Action): SessionState;
  subscribe(fn: (state: SessionState) => void): () => void;
}

export function createStore(): Store {
  let state = initialState();
  const actions: Action[] = [];
  const listeners = new Set<(s: SessionState) => void>();
  return {
    state: () => state,
    log: () => actions,
    dispatch(action) {
      actions.push(action);
      state = reduce(state, action);
      for (const fn of listeners) fn(state);
      return state;
    },
    subscribe(fn) {
      listeners.add(fn);
      return () => listeners.delete(fn);
    },
  };
}
