// Evaluation comparison plots: for each metric (and server count), grouped
// bars per control topology with edge-device counts on the x axis and 95%
// confidence whiskers on top, read from the evaluation aggregate CSVs.

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

export const TOPOLOGIES = ["decentralized", "hybrid", "centralized"];

export const PLOTTED_METRICS = [
  "offloaded_pct",
  "edge_success_pct",
  "local_success_pct",
  "avg_network_time_s",
  "total_return",
  "total_energy_j",
  "mean_server_cpu_util_pct",
];

export interface EvalScenario {
  topology: string;
  servers: number;
  devices: number;
  metrics: Map<string, { mean: number; halfWidth: number }>;
}

const SCENARIO_PATTERN = /^([a-z]+)_(\d+)s_(\d+)d$/;

export function loadEvaluation(dir: string): EvalScenario[] {
  if (!fs.existsSync(dir)) throw new Error(`no such folder: ${dir}`);
  const scenarios: EvalScenario[] = [];
  for (const entry of fs.readdirSync(dir).sort()) {
    const match = SCENARIO_PATTERN.exec(entry);
    const aggregate = path.join(dir, entry, "aggregate.csv");
    if (!match || !fs.existsSync(aggregate)) continue;
    const metrics = new Map<string, { mean: number; halfWidth: number }>();
    for (const row of readCsv(aggregate)) {
      metrics.set(asString(row.metric, "metric"), {
        mean: asNumber(row.mean, "mean"),
        halfWidth: asNumber(row.ci_half_width, "ci_half_width"),
      });
    }
    scenarios.push({
      topology: match[1],
      servers: Number(match[2]),
      devices: Number(match[3]),
      metrics,
    });
  }
  if (scenarios.length === 0) {
    throw new Error(`no <topology>_<N>s_<M>d/aggregate.csv trees under ${dir}`);
  }
  return scenarios;
}

export function renderEvaluationMetric(
  scenarios: EvalScenario[],
  metric: string,
  warn: (message: string) => void = (message) => console.warn(message)
): string | null {
  const withMetric = scenarios.filter((s) => s.metrics.has(metric));
  if (withMetric.length === 0) return null;
  const present = TOPOLOGIES.filter((t) => withMetric.some((s) => s.topology === t));
  const absent = TOPOLOGIES.filter((t) => !present.includes(t));
  if (absent.length > 0) {
    warn(`metric ${metric}: no data for ${absent.join(", ")}; plotting the rest`);
  }
  const deviceCounts = [...new Set(withMetric.map((s) => s.devices))].sort(
    (a, b) => a - b
  );

  const width = Math.max(640, deviceCounts.length * present.length * 46 + 170);
  const height = 320;
  const svg = new SvgBuilder(width, height);
  const m = DEFAULT_MARGIN;
  const values = withMetric.flatMap((s) => {
    const stat = s.metrics.get(metric)!;
    return [stat.mean - stat.halfWidth, stat.mean + stat.halfWidth, 0];
  });
  const [lo, hi] = extent(values);
  const yScale = linearScale(lo, hi, height - m.bottom, m.top);
  yAxis(svg, yScale, lo, hi, m.left, metric, m.top, height - m.bottom);

  const groupSlot = (width - m.left - m.right) / deviceCounts.length;
  const barSlot = (groupSlot * 0.8) / Math.max(1, present.length);
  deviceCounts.forEach((devices, gi) => {
    const groupX = m.left + groupSlot * gi + groupSlot * 0.1;
    present.forEach((topology, ti) => {
      const scenario = withMetric.find(
        (s) => s.topology === topology && s.devices === devices
      );
      if (!scenario) return;
      const stat = scenario.metrics.get(metric)!;
      const x = groupX + barSlot * ti + barSlot * 0.1;
      const w = barSlot * 0.8;
      const yZero = yScale(Math.max(lo, Math.min(hi, 0)));
      const yMean = yScale(stat.mean);
      svg.rect(x, Math.min(yMean, yZero), w, Math.abs(yMean - yZero),
        PALETTE[TOPOLOGIES.indexOf(topology) % PALETTE.length], {
          "data-kind": "eval-bar",
          "data-metric": metric,
          "data-topology": topology,
          "data-devices": devices,
          "data-mean": stat.mean,
          "data-halfwidth": stat.halfWidth,
        });
      svg.line(x + w / 2, yScale(stat.mean - stat.halfWidth),
        x + w / 2, yScale(stat.mean + stat.halfWidth), "#111", 3, {
          "data-kind": "eval-whisker",
          "data-metric": metric,
          "data-topology": topology,
          "data-devices": devices,
          "data-halfwidth": stat.halfWidth,
        });
    });
    svg.text(groupX + groupSlot * 0.4, height - m.bottom + 16, String(devices), 10);
  });
  present.forEach((topology, ti) => {
    svg.text(width - m.right - 4, m.top + 14 * (ti + 1), topology, 10, "end");
  });
  svg.text(width / 2, 16, `${metric} by control topology`, 13);
  svg.text(width / 2, height - 8, "edge devices", 11);
  return svg.toString();
}

export function plotEvaluation(
  inDir: string,
  outDir: string,
  warn: (message: string) => void = (message) => console.warn(message)
): string[] {
  const scenarios = loadEvaluation(inDir);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  const serverCounts = [...new Set(scenarios.map((s) => s.servers))].sort(
    (a, b) => a - b
  );
  for (const servers of serverCounts) {
    const subset = scenarios.filter((s) => s.servers === servers);
    for (const metric of PLOTTED_METRICS) {
      const svg = renderEvaluationMetric(subset, metric, warn);
      if (svg === null) continue;
      const file = path.join(outDir, `eval_${servers}s_${metric}.svg`);
      fs.writeFileSync(file, svg);
      written.push(file);
    }
  }
  return written;
}
