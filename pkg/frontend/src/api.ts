import type {
  Draft,
  Lock,
  MetaPayload,
  Mode,
  PredictPayload,
  SamplePayload,
} from "./types.js";

interface WireElement {
  text: string;
  center_x: number;
  center_y: number;
}

interface WireBackground {
  width: number;
  height: number;
  rgb_base64: string;
}

interface WireDocument {
  canvas: { width: number; height: number; background?: WireBackground };
  elements: WireElement[];
}

export interface SampleParams {
  p_k: Record<string, number>;
  n: number;
  mode: Mode;
  seed: number;
  locks: Lock[];
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ServiceError";
  }
}

export function draftToWire(draft: Draft): WireDocument {
  const canvas: WireDocument["canvas"] = {
    width: draft.canvasWidth,
    height: draft.canvasHeight,
  };
  if (draft.background) {
    canvas.background = {
      width: draft.background.width,
      height: draft.background.height,
      rgb_base64: draft.background.rgbBase64,
    };
  }
  return {
    canvas,
    elements: draft.boxes.map((b) => ({ text: b.text, center_x: b.cx, center_y: b.cy })),
  };
}

/** Error bodies are {detail: string} or pydantic's {detail: [{loc, msg}]}. */
function detailText(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (Array.isArray(detail)) {
      return detail
        .map((e) => {
          const loc = Array.isArray(e.loc) ? e.loc.join(".") : String(e.loc);
          return `${loc}: ${e.msg}`;
        })
        .join("; ");
    }
  }
  return JSON.stringify(body);
}

export interface ApiClient {
  meta(): Promise<MetaPayload>;
  predict(draft: Draft): Promise<PredictPayload>;
  sample(draft: Draft, params: SampleParams): Promise<SamplePayload>;
}

export function createApiClient(fetchFn: typeof fetch, base = ""): ApiClient {
  async function call<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetchFn(base + path, init);
    const body = await resp.json();
    if (!resp.ok) throw new ServiceError(resp.status, detailText(body));
    return body as T;
  }

  const post = (payload: unknown): RequestInit => ({
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });

  return {
    meta: () => call<MetaPayload>("/meta"),
    predict: (draft) => call<PredictPayload>("/predict", post({ document: draftToWire(draft) })),
    sample: (draft, params) =>
      call<SamplePayload>(
        "/sample",
        post({
          document: draftToWire(draft),
          p_k: params.p_k,
          n: params.n,
          mode: params.mode,
          seed: params.seed,
          locks: params.locks,
        }),
      ),
  };
}
