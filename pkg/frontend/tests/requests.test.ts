import { describe, expect, it } from "vitest";

import { createApiClient } from "../src/api.js";
import { createSampleFlow } from "../src/requests.js";
import { createStore, type Store } from "../src/store.js";
import { createFakeService, settle, type FakeService } from "./fake.js";

function session(): { store: Store; fake: FakeService; flow: ReturnType<typeof createSampleFlow> } {
  const store = createStore();
  const fake = createFakeService();
  const flow = createSampleFlow(store, createApiClient(fake.fetch));
  store.dispatch({ kind: "add_box", text: "Grand Opening", cx: 300, cy: 120 });
  store.dispatch({ kind: "add_box", text: "saturday march 7", cx: 300, cy: 380 });
  store.dispatch({ kind: "add_box", text: "128 Mill Road", cx: 300, cy: 640 });
  return { store, fake, flow };
}

describe("request orchestration", () => {
  it("runs predict then sample and lands the grid", async () => {
    const { store, fake, flow } = session();
    await flow.requestSamples();

    expect(fake.calls).toMatchObject({ predict: 1, sample: 1 });
    const kinds = store.log().map((a) => a.kind).slice(3);
    expect(kinds).toEqual(["request_started", "prediction_received", "samples_received"]);
    expect(store.state().grid?.samples).toHaveLength(6);
    expect(store.state().inflight).toBeNull();
  });

  it("refuses to call the service for an invalid draft", async () => {
    const store = createStore();
    const fake = createFakeService();
    const flow = createSampleFlow(store, createApiClient(fake.fetch));
    await flow.requestSamples();
    expect(fake.calls.predict).toBe(0);
  });

  it("sends only locks that survive the fresh prediction", async () => {
    const { store, fake, flow } = session();
    await flow.requestSamples();
    store.dispatch({ kind: "set_lock", lock: { attribute: "color", cluster: 1, label: 4 } });

    await flow.requestSamples();
    expect(fake.sampleBodies[1].locks).toEqual([
      { attribute: "color", cluster: 1, label: 4 },
    ]);

    // a one-element document has no cluster 1, so the lock must not be sent
    store.dispatch({ kind: "delete_box", id: 2 });
    store.dispatch({ kind: "delete_box", id: 3 });
    await flow.requestSamples();
    expect(fake.sampleBodies[2].locks).toEqual([]);
    expect(store.state().locks).toEqual([]);
  });

  it("drops a request superseded while predicting, without sampling for it", async () => {
    const { store, fake, flow } = session();
    const release = fake.holdNextPredict();
    const held = flow.requestSamples();
    await settle();

    await flow.changeSlider("font", 0.97);
    release();
    await held;

    expect(fake.calls.predict).toBe(2);
    expect(fake.calls.sample).toBe(1); // the superseded request never sampled
    const starts = store.log().filter((a) => a.kind === "request_started");
    expect(starts).toHaveLength(2);
    expect(store.state().grid?.requestId).toBe(2);
    expect(store.state().sliders.font).toBe(0.97);
  });

  it("surfaces service failures verbatim and recovers on retry", async () => {
    const { store, fake, flow } = session();
    fake.failNextSample("p for font must be in (0, 1], got 1.5");
    await flow.requestSamples();

    expect(store.state().error).toBe("p for font must be in (0, 1], got 1.5");
    expect(store.state().grid).toBeNull();

    await flow.retry();
    expect(store.state().error).toBeNull();
    expect(store.state().grid?.samples).toHaveLength(6);
  });

  it("formats field-level validation details one per field", async () => {
    const { store, fake, flow } = session();
    fake.failNextSample([
      { loc: ["document", "elements", 0, "text"], msg: "too short" },
      { loc: ["n"], msg: "must be >= 1" },
    ]);
    await flow.requestSamples();
    expect(store.state().error).toBe("document.elements.0.text: too short; n: must be >= 1");
  });
});
