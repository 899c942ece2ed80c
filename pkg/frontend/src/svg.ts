// Tiny deterministic SVG builder: every statistic that ends up in the
// picture is also carried verbatim in data-* attributes so tests (and
// curious users) can diff the rendering against the source CSVs.

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_MARGIN: Margin = { top: 30, right: 20, bottom: 40, left: 70 };

export type Scale = (value: number) => number;

export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number
): Scale {
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (value: number) => r0 + ((value - d0) / span) * (r1 - r0);
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

export const PALETTE = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
  "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac",
];

const fmt = (value: number): string => value.toFixed(2);

function attrs(pairs: Record<string, string | number | undefined>): string {
  return Object.entries(pairs)
    .filter(([, v]) => v !== undefined)
    .map(([k, v]) => ` ${k}="${String(v)}"`)
    .join("");
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  rect(
    x: number, y: number, w: number, h: number, fill: string,
    data: Record<string, string | number | undefined> = {}
  ): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}"` +
        ` fill="${fill}"${attrs(data)}/>`
    );
  }

  line(
    x1: number, y1: number, x2: number, y2: number, stroke: string,
    strokeWidth = 1,
    data: Record<string, string | number | undefined> = {}
  ): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}"` +
        ` stroke="${stroke}" stroke-width="${strokeWidth}"${attrs(data)}/>`
    );
  }

  polyline(
    points: Array<[number, number]>, stroke: string, strokeWidth = 1.5,
    data: Record<string, string | number | undefined> = {}
  ): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${stroke}"` +
        ` stroke-width="${strokeWidth}"${attrs(data)}/>`
    );
  }

  polygon(
    points: Array<[number, number]>, fill: string, opacity = 0.25,
    data: Record<string, string | number | undefined> = {}
  ): void {
    const path = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polygon points="${path}" fill="${fill}" opacity="${opacity}"${attrs(data)}/>`
    );
  }

  text(
    x: number, y: number, content: string, size = 11, anchor = "middle",
    rotate?: number
  ): void {
    const transform =
      rotate === undefined ? "" : ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"`;
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}"` +
        ` font-family="sans-serif" text-anchor="${anchor}"${transform}>` +
        `${escapeText(content)}</text>`
    );
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}"` +
      ` height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function yAxis(
  svg: SvgBuilder, scale: Scale, lo: number, hi: number,
  x: number, label: string, yTop: number, yBottom: number
): void {
  svg.line(x, yTop, x, yBottom, "#333");
  const ticks = 5;
  for (let i = 0; i <= ticks; i += 1) {
    const value = lo + ((hi - lo) * i) / ticks;
    const y = scale(value);
    svg.line(x - 4, y, x, y, "#333");
    svg.text(x - 7, y + 3.5, formatTick(value), 9, "end");
  }
  svg.text(16, (yTop + yBottom) / 2, label, 11, "middle", -90);
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 10000 || magnitude < 0.01) return value.toExponential(1);
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(2);
}
