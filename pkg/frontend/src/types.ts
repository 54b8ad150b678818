export const ATTRIBUTES = [
  "font",
  "color",
  "alignment",
  "capitalization",
  "font_size",
  "angle",
  "letter_spacing",
  "line_spacing",
] as const;

export type Attribute = (typeof ATTRIBUTES)[number];

export const GEOMETRIC: ReadonlySet<Attribute> = new Set([
  "font_size",
  "angle",
  "letter_spacing",
  "line_spacing",
]);

export type Mode = "plain" | "structure_preserved";

export interface DraftBox {
  id: number;
  text: string;
  cx: number;
  cy: number;
}

export interface Background {
  width: number;
  height: number;
  rgbBase64: string;
}

export interface Draft {
  canvasWidth: number;
  canvasHeight: number;
  background: Background | null;
  boxes: DraftBox[];
}

export interface Lock {
  attribute: Attribute;
  cluster: number;
  label: number;
}

/** Per-element label rows and cluster ids, both in request order. */
export interface PredictPayload {
  labels: number[][];
  clusters: Record<string, number[]>;
}

export interface SamplePayload {
  samples: number[][][];
  clusters: Record<string, number[]>;
  svgs: string[];
}

export interface MetaPayload {
  attributes: string[];
  valid_counts: Record<string, number>;
  fonts: Record<string, string>;
  colors: string[];
  centroids: Record<string, number[]>;
  alignments: string[];
  capitalizations: string[];
  modes: string[];
}

export interface FieldError {
  field: string;
  message: string;
}
