/** Cluster overlay colors and human-readable label text, all service-derived. */

import { GEOMETRIC, type Attribute, type MetaPayload } from "./types.js";

// fixed palette, assigned by cluster id so colors never shuffle between renders
const CLUSTER_COLORS = [
  "#e6194b",
  "#3cb44b",
  "#4363d8",
  "#f58231",
  "#911eb4",
  "#46f0f0",
  "#f032e6",
  "#9a6324",
  "#008080",
  "#808000",
  "#aa3377",
  "#557799",
];

export function clusterColor(id: number): string {
  return CLUSTER_COLORS[((id % CLUSTER_COLORS.length) + CLUSTER_COLORS.length) % CLUSTER_COLORS.length];
}

const UNITS: Partial<Record<Attribute, (v: number) => string>> = {
  font_size: (v) => `${v.toFixed(1)} pt`,
  angle: (v) => `${v.toFixed(1)}°`,
  letter_spacing: (v) => `${v.toFixed(2)} px`,
  line_spacing: (v) => `×${v.toFixed(2)}`,
};

/** Display text for one label id; every value originates from /meta. */
export function labelText(meta: MetaPayload, attribute: Attribute, label: number): string {
  if (attribute === "font") return meta.fonts[String(label)] ?? `font ${label}`;
  if (attribute === "color") return meta.colors[label] ?? `color ${label}`;
  if (attribute === "alignment") return meta.alignments[label] ?? `alignment ${label}`;
  if (attribute === "capitalization") {
    return meta.capitalizations[label] ?? `capitalization ${label}`;
  }
  const centroid = meta.centroids[attribute]?.[label];
  if (centroid === undefined) return `${attribute} ${label}`;
  return UNITS[attribute]!(centroid);
}

export interface LabelChoice {
  label: number;
  text: string;
}

/** Valid labels for the lock control of one attribute. */
export function labelChoices(meta: MetaPayload, attribute: Attribute): LabelChoice[] {
  if (attribute === "font") {
    return Object.keys(meta.fonts)
      .map(Number)
      .sort((a, b) => a - b)
      .map((label) => ({ label, text: labelText(meta, "font", label) }));
  }
  let count: number;
  if (GEOMETRIC.has(attribute)) count = meta.centroids[attribute]?.length ?? 0;
  else count = meta.valid_counts[attribute] ?? 0;
  const out: LabelChoice[] = [];
  for (let label = 0; label < count; label++) {
    out.push({ label, text: labelText(meta, attribute, label) });
  }
  return out;
}
