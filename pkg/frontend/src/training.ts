// Training-progress plot: three stacked panels over episodes - total
// return with its simple moving average, per-agent returns, per-agent
// mean prices.

import * as fs from "node:fs";
import * as path from "node:path";

import { asNumber, readCsv } from "./csv";
import {
  DEFAULT_MARGIN,
  PALETTE,
  Scale,
  SvgBuilder,
  extent,
  linearScale,
  yAxis,
} from "./svg";

export interface TrainingData {
  episodes: number[];
  total: number[];
  agents: string[];
  returns: Map<string, number[]>;
  prices: Map<string, number[]>;
}

export const DEFAULT_SMA_WINDOW = 10;

export function loadTraining(dir: string): TrainingData {
  const file = path.join(dir, "training_progress.csv");
  if (!fs.existsSync(file)) {
    throw new Error(`not a training campaign folder: missing ${file}`);
  }
  const rows = readCsv(file);
  if (rows.length === 0) throw new Error(`${file} is empty`);
  const agents = Object.keys(rows[0])
    .filter((k) => k.startsWith("return_"))
    .map((k) => k.slice("return_".length))
    .sort();
  const data: TrainingData = {
    episodes: rows.map((r) => asNumber(r.episode, "episode")),
    total: rows.map((r) => asNumber(r.total_return, "total_return")),
    agents,
    returns: new Map(),
    prices: new Map(),
  };
  for (const agent of agents) {
    data.returns.set(
      agent,
      rows.map((r) => asNumber(r[`return_${agent}`], `return_${agent}`))
    );
    data.prices.set(
      agent,
      rows.map((r) => asNumber(r[`mean_price_${agent}`], `mean_price_${agent}`))
    );
  }
  return data;
}

// Full-window trailing mean: point i covers values[i-window+1 .. i]. A
// window longer than the series collapses to one point, the overall mean.
// Each window sums left to right from scratch: series are short and a
// running sum would drift away from fresh summation in the last bits.
export function movingAverage(values: number[], window: number): number[] {
  if (window < 1) throw new Error("window must be >= 1");
  if (values.length === 0) return [];
  if (window > values.length) {
    return [values.reduce((a, b) => a + b, 0) / values.length];
  }
  const out: number[] = [];
  for (let i = window - 1; i < values.length; i += 1) {
    let sum = 0;
    for (let j = i - window + 1; j <= i; j += 1) sum += values[j];
    out.push(sum / window);
  }
  return out;
}

interface Panel {
  y0: number;
  y1: number;
}

function panelScale(values: number[], panel: Panel): [Scale, number, number] {
  const [lo, hi] = extent(values);
  return [linearScale(lo, hi, panel.y1, panel.y0), lo, hi];
}

export function renderTraining(
  data: TrainingData,
  window = DEFAULT_SMA_WINDOW
): string {
  const width = Math.max(680, data.episodes.length * 6 + 160);
  const panelHeight = 200;
  const height = panelHeight * 3 + 70;
  const svg = new SvgBuilder(width, height);
  const m = DEFAULT_MARGIN;
  const xScale = linearScale(
    data.episodes[0],
    data.episodes[data.episodes.length - 1] || 1,
    m.left,
    width - m.right
  );
  const panels: Panel[] = [0, 1, 2].map((i) => ({
    y0: m.top + i * (panelHeight + 10),
    y1: m.top + i * (panelHeight + 10) + panelHeight - m.bottom,
  }));

  // panel 1: total return and its moving average
  const sma = movingAverage(data.total, window);
  const [tScale, tLo, tHi] = panelScale(data.total, panels[0]);
  yAxis(svg, tScale, tLo, tHi, m.left, "total return", panels[0].y0, panels[0].y1);
  svg.polyline(
    data.total.map((v, i) => [xScale(data.episodes[i]), tScale(v)]),
    "#9ecae9", 1.5,
    { "data-kind": "total-return" }
  );
  const smaOffset = Math.min(window - 1, data.episodes.length - 1);
  svg.polyline(
    sma.map((v, i) => [xScale(data.episodes[smaOffset + i] ?? data.episodes[i]), tScale(v)]),
    "#d62728", 2.5,
    {
      "data-kind": "moving-average",
      "data-window": window,
      "data-values": sma.join(";"),
    }
  );
  svg.text(width / 2, 16, "training progress", 13);

  // panel 2: per-agent returns
  const allReturns = data.agents.flatMap((a) => data.returns.get(a)!);
  const [rScale, rLo, rHi] = panelScale(allReturns, panels[1]);
  yAxis(svg, rScale, rLo, rHi, m.left, "return per agent", panels[1].y0, panels[1].y1);
  data.agents.forEach((agent, ai) => {
    svg.polyline(
      data.returns.get(agent)!.map((v, i) => [xScale(data.episodes[i]), rScale(v)]),
      PALETTE[ai % PALETTE.length], 1.5,
      { "data-kind": "agent-return", "data-agent": agent }
    );
  });

  // panel 3: per-agent mean prices
  const allPrices = data.agents.flatMap((a) => data.prices.get(a)!);
  const [pScale, pLo, pHi] = panelScale(allPrices, panels[2]);
  yAxis(svg, pScale, pLo, pHi, m.left, "mean price per agent", panels[2].y0, panels[2].y1);
  data.agents.forEach((agent, ai) => {
    svg.polyline(
      data.prices.get(agent)!.map((v, i) => [xScale(data.episodes[i]), pScale(v)]),
      PALETTE[ai % PALETTE.length], 1.5,
      { "data-kind": "agent-price", "data-agent": agent }
    );
  });
  svg.text(width / 2, height - 8, "episode", 11);
  return svg.toString();
}

export function plotTraining(
  inDir: string,
  outDir: string,
  window = DEFAULT_SMA_WINDOW
): string {
  const data = loadTraining(inDir);
  fs.mkdirSync(outDir, { recursive: true });
  const file = path.join(outDir, "training.svg");
  fs.writeFileSync(file, renderTraining(data, window));
  return file;
}
