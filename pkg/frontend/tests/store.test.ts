import { describe, expect, it } from "vitest";

import {
  canSample,
  initialState,
  rasterRanks,
  reduce,
  replay,
  validateDraft,
  type Action,
  type SessionState,
} from "../src/store.js";
import { ATTRIBUTES, GEOMETRIC } from "../src/types.js";
import { fakeClusters, FAKE_META } from "./fake.js";

function run(actions: Action[], from?: SessionState): SessionState {
  return actions.reduce(reduce, from ?? initialState());
}

const threeBoxes: Action[] = [
  { kind: "add_box", text: "Grand Opening", cx: 300, cy: 120 },
  { kind: "add_box", text: "saturday march 7", cx: 300, cy: 380 },
  { kind: "add_box", text: "128 Mill Road", cx: 300, cy: 640 },
];

const prediction = {
  labels: [ATTRIBUTES.map(() => 0), ATTRIBUTES.map(() => 1), ATTRIBUTES.map(() => 1)],
  clusters: fakeClusters(3),
};

describe("initial state", () => {
  it("starts geometric sliders at 0.1 and categorical at 0.9", () => {
    const s = initialState();
    for (const a of ATTRIBUTES) {
      expect(s.sliders[a]).toBe(GEOMETRIC.has(a) ? 0.1 : 0.9);
    }
  });

  it("defaults to a 6-sample structure-preserved grid", () => {
    const s = initialState();
    expect(s.n).toBe(6);
    expect(s.mode).toBe("structure_preserved");
    expect(s.draft.boxes).toEqual([]);
  });
});

describe("draft edits", () => {
  it("adds, moves, renames and deletes boxes", () => {
    let s = run(threeBoxes);
    expect(s.draft.boxes.map((b) => b.id)).toEqual([1, 2, 3]);

    s = reduce(s, { kind: "move_box", id: 2, cx: 10, cy: 20 });
    expect(s.draft.boxes[1]).toMatchObject({ cx: 10, cy: 20 });

    s = reduce(s, { kind: "set_text", id: 3, text: "new" });
    expect(s.draft.boxes[2].text).toBe("new");

    s = reduce(s, { kind: "delete_box", id: 1 });
    expect(s.draft.boxes.map((b) => b.id)).toEqual([2, 3]);
  });

  it("ignores box number 51", () => {
    const adds = Array.from({ length: 51 }, (_, i): Action => ({
      kind: "add_box",
      text: `t${i}`,
      cx: i,
      cy: i,
    }));
    expect(run(adds).draft.boxes).toHaveLength(50);
  });
});

describe("slider and sampling params", () => {
  it("keeps sliders inside (0, 1]", () => {
    let s = initialState();
    for (const bad of [0, -0.2, 1.0001, NaN]) {
      expect(reduce(s, { kind: "set_slider", attribute: "font", p: bad })).toBe(s);
    }
    s = reduce(s, { kind: "set_slider", attribute: "font", p: 1 });
    expect(s.sliders.font).toBe(1);
  });

  it("bounds n to the service's 1..64", () => {
    const s = initialState();
    expect(reduce(s, { kind: "set_n", n: 0 })).toBe(s);
    expect(reduce(s, { kind: "set_n", n: 65 })).toBe(s);
    expect(reduce(s, { kind: "set_n", n: 2.5 })).toBe(s);
    expect(reduce(s, { kind: "set_n", n: 64 }).n).toBe(64);
  });
});

describe("locks", () => {
  const predicted = run([
    ...threeBoxes,
    { kind: "request_started", requestId: 1 },
    { kind: "prediction_received", requestId: 1, payload: prediction },
  ]);

  it("rejects locks before any prediction", () => {
    const s = run(threeBoxes);
    expect(
      reduce(s, { kind: "set_lock", lock: { attribute: "color", cluster: 0, label: 3 } }),
    ).toBe(s);
  });

  it("rejects clusters the latest prediction does not contain", () => {
    expect(
      reduce(predicted, {
        kind: "set_lock",
        lock: { attribute: "color", cluster: 7, label: 3 },
      }),
    ).toBe(predicted);
  });

  it("stores and replaces a lock per (attribute, cluster)", () => {
    let s = reduce(predicted, {
      kind: "set_lock",
      lock: { attribute: "color", cluster: 1, label: 3 },
    });
    s = reduce(s, { kind: "set_lock", lock: { attribute: "color", cluster: 1, label: 5 } });
    expect(s.locks).toEqual([{ attribute: "color", cluster: 1, label: 5 }]);

    s = reduce(s, { kind: "clear_lock", attribute: "color", cluster: 1 });
    expect(s.locks).toEqual([]);
  });

  it("prunes locks when a new prediction drops their cluster", () => {
    let s = reduce(predicted, {
      kind: "set_lock",
      lock: { attribute: "color", cluster: 1, label: 5 },
    });
    s = run(
      [
        { kind: "delete_box", id: 2 },
        { kind: "delete_box", id: 3 },
        { kind: "request_started", requestId: 2 },
        {
          kind: "prediction_received",
          requestId: 2,
          payload: { labels: [prediction.labels[0]], clusters: fakeClusters(1) },
        },
      ],
      s,
    );
    expect(s.locks).toEqual([]);
  });
});

describe("request lifecycle", () => {
  const grid = {
    samples: [[[0, 0, 0, 0, 0, 0, 0, 0]]],
    clusters: fakeClusters(1),
    svgs: ["<svg/>"],
  };

  it("applies responses only for the in-flight request id", () => {
    let s = run([
      ...threeBoxes,
      { kind: "request_started", requestId: 1 },
      { kind: "request_started", requestId: 2 },
    ]);
    const stale = reduce(s, {
      kind: "samples_received",
      requestId: 1,
      payload: grid,
      seed: 9,
    });
    expect(stale).toBe(s);
    expect(stale.grid).toBeNull();

    s = reduce(s, { kind: "samples_received", requestId: 2, payload: grid, seed: 9 });
    expect(s.grid?.requestId).toBe(2);
    expect(s.inflight).toBeNull();
  });

  it("ignores stale failures but surfaces current ones verbatim", () => {
    let s = run([...threeBoxes, { kind: "request_started", requestId: 5 }]);
    expect(reduce(s, { kind: "request_failed", requestId: 4, message: "old" })).toBe(s);

    s = reduce(s, { kind: "request_failed", requestId: 5, message: "p for font must be in (0, 1], got 1.5" });
    expect(s.error).toBe("p for font must be in (0, 1], got 1.5");
    expect(s.inflight).toBeNull();
  });
});

describe("draft validation", () => {
  it("accepts a well-formed draft", () => {
    expect(validateDraft(run(threeBoxes).draft)).toEqual([]);
  });

  it("flags empty text, missing boxes and bad canvas sizes", () => {
    const empty = initialState().draft;
    expect(validateDraft(empty).map((e) => e.field)).toContain("elements");

    const s = run([
      { kind: "add_box", text: "", cx: 1, cy: 1 },
      { kind: "set_canvas", width: 0, height: 10001 },
    ]);
    const fields = validateDraft(s.draft).map((e) => e.field);
    expect(fields).toContain("box 1 text");
    expect(fields).toContain("canvas.width");
    expect(fields).toContain("canvas.height");
  });

  it("disables sampling for empty drafts and while a request is live", () => {
    expect(canSample(initialState())).toBe(false);
    const busy = run([...threeBoxes, { kind: "request_started", requestId: 1 }]);
    expect(canSample(busy)).toBe(false);
    expect(canSample(run(threeBoxes))).toBe(true);
  });
});

describe("raster order indicator", () => {
  it("sorts by top, then left, then insertion order", () => {
    const s = run([
      { kind: "add_box", text: "a", cx: 100, cy: 200 },
      { kind: "add_box", text: "b", cx: 300, cy: 50 },
      { kind: "add_box", text: "c", cx: 100, cy: 200 },
      { kind: "add_box", text: "d", cx: 40, cy: 200 },
    ]);
    expect(rasterRanks(s.draft)).toEqual([2, 0, 3, 1]);
  });

  it("re-sorts after a drag", () => {
    let s = run(threeBoxes);
    expect(rasterRanks(s.draft)).toEqual([0, 1, 2]);
    s = reduce(s, { kind: "move_box", id: 3, cx: 300, cy: 10 });
    expect(rasterRanks(s.draft)).toEqual([1, 2, 0]);
  });
});

describe("action log replay", () => {
  it("reproduces the exact session state", () => {
    const script: Action[] = [
      { kind: "meta_received", meta: FAKE_META },
      ...threeBoxes,
      { kind: "set_slider", attribute: "font", p: 0.7 },
      { kind: "set_mode", mode: "plain" },
      { kind: "request_started", requestId: 1 },
      { kind: "prediction_received", requestId: 1, payload: prediction },
      { kind: "set_lock", lock: { attribute: "color", cluster: 1, label: 2 } },
      {
        kind: "samples_received",
        requestId: 1,
        payload: {
          samples: [prediction.labels],
          clusters: prediction.clusters,
          svgs: ["<svg/>"],
        },
        seed: 0,
      },
      { kind: "move_box", id: 1, cx: 5, cy: 900 },
    ];
    expect(replay(script)).toEqual(run(script));
  });
});
