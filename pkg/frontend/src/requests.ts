/**
 * Sample request orchestration: /predict then /sample per request, with at
 * most one request live at a time. A newer request supersedes the live one;
 * responses from superseded requests are discarded by request id, both here
 * (no follow-up calls) and in the reducer (no state change).
 */

import type { ApiClient } from "./api.js";
import { validateDraft, type Store } from "./store.js";
import type { Attribute, Mode } from "./types.js";

export interface SampleFlow {
  /** Issue one predict+sample round trip, superseding any in-flight request. */
  requestSamples(): Promise<void>;
  /** Re-issue with the current state (after a failure). */
  retry(): Promise<void>;
  /** Slider edit: records the value and issues exactly one superseding request. */
  changeSlider(attribute: Attribute, p: number): Promise<void>;
  /** Mode toggle: records the mode and issues exactly one superseding request. */
  changeMode(mode: Mode): Promise<void>;
}

export function createSampleFlow(store: Store, api: ApiClient): SampleFlow {
  let nextId = 1;
  let currentId = 0;

  async function requestSamples(): Promise<void> {
    const start = store.state();
    if (validateDraft(start.draft).length > 0) return; // inline errors, no request
    const id = nextId++;
    currentId = id;
    store.dispatch({ kind: "request_started", requestId: id });

    const draft = start.draft;
    const params = {
      p_k: { ...start.sliders },
      n: start.n,
      mode: start.mode,
      seed: start.seed,
    };
    try {
      const prediction = await api.predict(draft);
      if (currentId !== id) return; // superseded while predicting
      store.dispatch({ kind: "prediction_received", requestId: id, payload: prediction });
      // locks re-read after the reducer pruned them against this prediction,
      // so /sample only ever sees clusters the service just reported
      const locks = store.state().locks;
      const payload = await api.sample(draft, { ...params, locks });
      if (currentId !== id) return; // superseded while sampling
      store.dispatch({ kind: "samples_received", requestId: id, payload, seed: params.seed });
    } catch (err) {
      if (currentId !== id) return; // stale failure
      const message = err instanceof Error ? err.message : String(err);
      store.dispatch({ kind: "request_failed", requestId: id, message });
    }
  }

  return {
    requestSamples,
    retry: requestSamples,
    changeSlider(attribute, p) {
      store.dispatch({ kind: "set_slider", attribute, p });
      return requestSamples();
    },
    changeMode(mode) {
      store.dispatch({ kind: "set_mode", mode });
      return requestSamples();
    },
  };
}
