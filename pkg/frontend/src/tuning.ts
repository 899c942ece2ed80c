// Hyperparameter-tuning plot: one bar per learning-rate combination with a
// 95% confidence whisker on top, plus per-agent mean-return curves with
// shaded confidence bands. All numbers come straight from the campaign's
// aggregate CSVs; nothing is recomputed from raw episode logs.

import * as fs from "node:fs";
import * as path from "node:path";

import { asNumber, asString, readCsv } from "./csv";
import {
  DEFAULT_MARGIN,
  PALETTE,
  SvgBuilder,
  extent,
  linearScale,
  yAxis,
} from "./svg";

export interface ComboStat {
  combo: string;
  actorLr: number;
  criticLr: number;
  mean: number;
  halfWidth: number;
}

export interface AgentStat {
  mean: number;
  halfWidth: number;
}

export interface TuningData {
  combos: ComboStat[];
  agents: string[];
  perAgent: Map<string, AgentStat[]>; // one entry per combo, same order
}

export function loadTuning(dir: string): TuningData {
  const comboFile = path.join(dir, "tuning_combos.csv");
  if (!fs.existsSync(comboFile)) {
    throw new Error(`not a tuning campaign folder: missing ${comboFile}`);
  }
  const combos: ComboStat[] = readCsv(comboFile).map((row) => ({
    combo: asString(row.combo, "combo"),
    actorLr: asNumber(row.actor_lr, "actor_lr"),
    criticLr: asNumber(row.critic_lr, "critic_lr"),
    mean: asNumber(row.mean_total_return, "mean_total_return"),
    halfWidth: asNumber(row.ci_half_width, "ci_half_width"),
  }));
  const missing = combos.filter(
    (c) => !fs.existsSync(path.join(dir, c.combo, "aggregate.csv"))
  );
  if (missing.length > 0) {
    throw new Error(
      `combos without aggregates: ${missing.map((c) => c.combo).join(", ")}`
    );
  }
  const perAgent = new Map<string, AgentStat[]>();
  combos.forEach((combo, index) => {
    for (const row of readCsv(path.join(dir, combo.combo, "aggregate.csv"))) {
      const metric = asString(row.metric, "metric");
      if (!metric.startsWith("return_")) continue;
      const agent = metric.slice("return_".length);
      if (!perAgent.has(agent)) perAgent.set(agent, []);
      const series = perAgent.get(agent)!;
      if (series.length !== index) {
        throw new Error(`agent ${agent} missing from combo ${combos[series.length].combo}`);
      }
      series.push({
        mean: asNumber(row.mean, `mean of ${metric}`),
        halfWidth: asNumber(row.ci_half_width, `ci of ${metric}`),
      });
    }
  });
  return { combos, agents: [...perAgent.keys()].sort(), perAgent };
}

export function renderTuning(data: TuningData): string {
  const width = Math.max(640, 90 * data.combos.length + 140);
  const panelHeight = 260;
  const height = panelHeight * 2 + 60;
  const svg = new SvgBuilder(width, height);
  const m = DEFAULT_MARGIN;

  // upper panel: platform total return per combo
  const top = { y0: m.top, y1: m.top + panelHeight - m.bottom };
  const values = data.combos.flatMap((c) => [c.mean - c.halfWidth, c.mean + c.halfWidth, 0]);
  const [lo, hi] = extent(values);
  const yScale = linearScale(lo, hi, top.y1, top.y0);
  yAxis(svg, yScale, lo, hi, m.left, "mean total return", top.y0, top.y1);
  const slot = (width - m.left - m.right) / Math.max(1, data.combos.length);
  const barWidth = slot * 0.6;
  data.combos.forEach((combo, i) => {
    const x = m.left + slot * i + (slot - barWidth) / 2;
    const yZero = yScale(Math.max(lo, Math.min(hi, 0)));
    const yMean = yScale(combo.mean);
    svg.rect(x, Math.min(yMean, yZero), barWidth, Math.abs(yMean - yZero), PALETTE[0], {
      "data-kind": "tuning-bar",
      "data-combo": combo.combo,
      "data-mean": combo.mean,
      "data-halfwidth": combo.halfWidth,
    });
    svg.line(
      x + barWidth / 2, yScale(combo.mean - combo.halfWidth),
      x + barWidth / 2, yScale(combo.mean + combo.halfWidth),
      "#111", 3,
      { "data-kind": "tuning-whisker", "data-combo": combo.combo,
        "data-halfwidth": combo.halfWidth }
    );
    svg.text(x + barWidth / 2, top.y1 + 14, combo.combo, 8, "middle", 0);
  });
  svg.text(width / 2, 16, "platform return per learning-rate combination", 13);

  // lower panel: per-agent mean return with confidence band
  const bottom = { y0: panelHeight + 50, y1: panelHeight + 50 + panelHeight - m.bottom };
  const agentValues: number[] = [];
  for (const agent of data.agents) {
    for (const stat of data.perAgent.get(agent)!) {
      agentValues.push(stat.mean - stat.halfWidth, stat.mean + stat.halfWidth);
    }
  }
  const [alo, ahi] = extent(agentValues);
  const ayScale = linearScale(alo, ahi, bottom.y1, bottom.y0);
  yAxis(svg, ayScale, alo, ahi, m.left, "mean return per agent", bottom.y0, bottom.y1);
  const xOf = (i: number) => m.left + slot * i + slot / 2;
  data.agents.forEach((agent, ai) => {
    const series = data.perAgent.get(agent)!;
    const color = PALETTE[ai % PALETTE.length];
    const upper = series.map((s, i) => [xOf(i), ayScale(s.mean + s.halfWidth)] as [number, number]);
    const lower = series.map((s, i) => [xOf(i), ayScale(s.mean - s.halfWidth)] as [number, number]);
    svg.polygon([...upper, ...lower.reverse()], color, 0.2, {
      "data-kind": "tuning-band",
      "data-agent": agent,
      "data-halfwidths": series.map((s) => s.halfWidth).join(";"),
    });
    svg.polyline(series.map((s, i) => [xOf(i), ayScale(s.mean)]), color, 2, {
      "data-kind": "tuning-agent-line",
      "data-agent": agent,
      "data-means": series.map((s) => s.mean).join(";"),
    });
    svg.text(width - m.right - 4, bottom.y0 + 14 * (ai + 1), agent, 10, "end");
  });
  data.combos.forEach((combo, i) => {
    svg.text(xOf(i), bottom.y1 + 14, combo.combo, 8);
  });
  return svg.toString();
}

export function plotTuning(inDir: string, outDir: string): string {
  const data = loadTuning(inDir);
  fs.mkdirSync(outDir, { recursive: true });
  const file = path.join(outDir, "tuning.svg");
  fs.writeFileSync(file, renderTuning(data));
  return file;
}
