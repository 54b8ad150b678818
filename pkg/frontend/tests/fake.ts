/**
 * Deterministic stand-in for the typography service, exposing a fetch()
 * compatible entry point plus call counters and response gates so tests can
 * hold a response in flight and release it later.
 */

import { ATTRIBUTES } from "../src/types.js";
import type { MetaPayload } from "../src/types.js";

const VALID_COUNTS: Record<string, number> = {
  font: 16,
  color: 18,
  alignment: 3,
  capitalization: 2,
  font_size: 9,
  angle: 3,
  letter_spacing: 4,
  line_spacing: 4,
};

export const FAKE_META: MetaPayload = {
  attributes: [...ATTRIBUTES],
  valid_counts: { ...VALID_COUNTS },
  fonts: Object.fromEntries(
    Array.from({ length: 16 }, (_, i) => [String(i), `Family ${i}, serif`]),
  ),
  colors: Array.from({ length: 18 }, (_, i) => `#${(i * 14 + 16).toString(16).padStart(2, "0")}4466`),
  centroids: {
    font_size: [10, 12, 14, 18, 24, 30, 36, 48, 64],
    angle: [-8, 0, 8],
    letter_spacing: [0, 0.5, 1, 2],
    line_spacing: [1, 1.15, 1.3, 1.5],
  },
  alignments: ["left", "center", "right"],
  capitalizations: ["none", "uppercase"],
  modes: ["plain", "structure_preserved", "top1"],
};

/** Every element except the first lands in cluster 1, mirroring a shared style. */
export function fakeClusters(numElements: number): Record<string, number[]> {
  const assignment = Array.from({ length: numElements }, (_, i) => Math.min(i, 1));
  return Object.fromEntries(ATTRIBUTES.map((a) => [a, [...assignment]]));
}

function hashLabel(count: number, parts: number[]): number {
  let h = 2166136261 >>> 0;
  for (const p of parts) {
    h = (h ^ ((p + 40503) >>> 0)) >>> 0;
    h = Math.imul(h, 16777619) >>> 0;
  }
  return h % count;
}

interface Gate {
  promise: Promise<void>;
  release: () => void;
}

function gate(): Gate {
  let release!: () => void;
  const promise = new Promise<void>((resolve) => {
    release = resolve;
  });
  return { promise, release };
}

export interface FakeService {
  fetch: typeof fetch;
  calls: { meta: number; predict: number; sample: number };
  sampleBodies: any[];
  /** Hold the next /predict (resp. /sample) response until the returned fn runs. */
  holdNextPredict(): () => void;
  holdNextSample(): () => void;
  /** Make the next /sample fail with this detail payload. */
  failNextSample(detail: unknown): void;
}

export function createFakeService(): FakeService {
  const calls = { meta: 0, predict: 0, sample: 0 };
  const sampleBodies: any[] = [];
  let predictGate: Gate | null = null;
  let sampleGate: Gate | null = null;
  let sampleFailure: unknown = undefined;

  function json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  const fetchImpl = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const path = String(input);
    if (path.endsWith("/meta")) {
      calls.meta += 1;
      return json(FAKE_META);
    }

    const body = JSON.parse(String(init?.body));
    if (path.endsWith("/predict")) {
      calls.predict += 1;
      if (predictGate) {
        const g = predictGate;
        predictGate = null;
        await g.promise;
      }
      const T = body.document.elements.length;
      return json({
        labels: Array.from({ length: T }, (_, i) =>
          ATTRIBUTES.map((a, k) => hashLabel(VALID_COUNTS[a], [900, i, k])),
        ),
        clusters: fakeClusters(T),
      });
    }

    if (path.endsWith("/sample")) {
      calls.sample += 1;
      sampleBodies.push(body);
      if (sampleGate) {
        const g = sampleGate;
        sampleGate = null;
        await g.promise;
      }
      if (sampleFailure !== undefined) {
        const detail = sampleFailure;
        sampleFailure = undefined;
        return json({ detail }, 400);
      }
      const T = body.document.elements.length;
      const clusters = fakeClusters(T);
      const samples = Array.from({ length: body.n }, (_, s) =>
        Array.from({ length: T }, (_, i) =>
          ATTRIBUTES.map((a, k) => {
            const pPart = Math.round((body.p_k[a] ?? 0) * 100);
            const unit = body.mode === "plain" ? i : clusters[a][i];
            return hashLabel(VALID_COUNTS[a], [body.seed, s, unit, k, pPart]);
          }),
        ),
      );
      for (const lock of body.locks ?? []) {
        const k = ATTRIBUTES.indexOf(lock.attribute);
        for (let i = 0; i < T; i++) {
          if (clusters[lock.attribute][i] === lock.cluster) {
            for (const row of samples) row[i][k] = lock.label;
          }
        }
      }
      return json({
        samples,
        clusters,
        svgs: Array.from(
          { length: body.n },
          (_, s) => `<svg xmlns="http://www.w3.org/2000/svg"><text>seed ${body.seed} #${s}</text></svg>`,
        ),
      });
    }

    return json({ detail: `no route ${path}` }, 404);
  };

  return {
    fetch: fetchImpl as typeof fetch,
    calls,
    sampleBodies,
    holdNextPredict() {
      predictGate = gate();
      const g = predictGate;
      return () => g.release();
    },
    holdNextSample() {
      sampleGate = gate();
      const g = sampleGate;
      return () => g.release();
    },
    failNextSample(detail) {
      sampleFailure = detail;
    },
  };
}

export const settle = (): Promise<void> => new Promise((r) => setTimeout(r, 0));
