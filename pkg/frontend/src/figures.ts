/**
 * Deterministic SVG rendering: a two-panel curve figure (cumulative affected
 * and currently-infectious shares, both in percent) and a grouped bar chart.
 * No DOM; everything is assembled as strings so output bytes depend only on
 * the inputs.
 */

import { scaleBand, scaleLinear } from "d3-scale";
import { line } from "d3-shape";
import type { BarGroup, CurveSeries } from "./csv.js";
import { SchemaError } from "./csv.js";

const WIDTH = 720;
const PANEL_HEIGHT = 260;
const MARGIN = { top: 28, right: 16, bottom: 40, left: 56 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function fmt(value: number): string {
  return Number.isInteger(value) ? String(value) : String(+value.toPrecision(8));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function axisBottom(scaleTicks: number[], x: (v: number) => number, y: number, unit = ""): string {
  const parts = [`<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}" stroke="#333"/>`];
  for (const tick of scaleTicks) {
    const px = x(tick);
    parts.push(`<line x1="${fmt(px)}" y1="${y}" x2="${fmt(px)}" y2="${y + 5}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(px)}" y="${y + 18}" text-anchor="middle" font-size="11">${fmt(tick)}${unit}</text>`);
  }
  return parts.join("\n");
}

function axisLeft(scaleTicks: number[], y: (v: number) => number, x: number, unit = ""): string {
  const parts: string[] = [];
  for (const tick of scaleTicks) {
    const py = y(tick);
    parts.push(`<line x1="${x - 5}" y1="${fmt(py)}" x2="${x}" y2="${fmt(py)}" stroke="#333"/>`);
    parts.push(`<text x="${x - 8}" y="${fmt(py + 4)}" text-anchor="end" font-size="11">${fmt(tick)}${unit}</text>`);
  }
  return parts.join("\n");
}

function panel(
  series: CurveSeries[],
  accessor: (p: { step: number; cumulative_fraction: number; infectious: number }) => number,
  title: string,
  offsetY: number,
  finalAttr: string,
): string {
  const maxStep = Math.max(...series.flatMap((s) => s.points.map((p) => p.step)), 1);
  const maxValue = Math.max(...series.flatMap((s) => s.points.map((p) => accessor(p) * 100)), 1e-9);
  const x = scaleLinear([0, maxStep], [MARGIN.left, WIDTH - MARGIN.right]);
  const y = scaleLinear([0, maxValue * 1.05], [offsetY + PANEL_HEIGHT - MARGIN.bottom, offsetY + MARGIN.top]);
  const path = line<{ step: number; value: number }>()
    .x((d) => x(d.step))
    .y((d) => y(d.value));
  const parts = [
    `<text x="${MARGIN.left}" y="${offsetY + 16}" font-size="13" font-weight="bold">${esc(title)}</text>`,
    axisBottom(x.ticks(8), x, offsetY + PANEL_HEIGHT - MARGIN.bottom),
    axisLeft(y.ticks(5), y, MARGIN.left, "%"),
  ];
  series.forEach((s, i) => {
    const data = s.points.map((p) => ({ step: p.step, value: accessor(p) * 100 }));
    const d = path(data);
    if (d === null) {
      throw new SchemaError(`series '${s.label}' has no drawable points`);
    }
    const last = data[data.length - 1];
    const rawFinal = accessor(s.points[s.points.length - 1]);
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<path d="${d}" fill="none" stroke="${color}" stroke-width="1.8" ` +
        `data-series="${esc(s.label)}" ${finalAttr}="${String(rawFinal)}"/>`,
    );
    parts.push(
      `<circle cx="${fmt(x(last.step))}" cy="${fmt(y(last.value))}" r="3" fill="${color}"/>`,
    );
  });
  return parts.join("\n");
}

export function renderCurves(series: CurveSeries[]): string {
  if (series.length === 0) {
    throw new SchemaError("no curve inputs given");
  }
  const height = 2 * PANEL_HEIGHT + 30;
  const legend = series
    .map((s, i) =>
      `<rect x="${MARGIN.left + 140 * i}" y="${2 * PANEL_HEIGHT + 8}" width="12" height="12" fill="${PALETTE[i % PALETTE.length]}"/>` +
      `<text x="${MARGIN.left + 140 * i + 16}" y="${2 * PANEL_HEIGHT + 18}" font-size="12">${esc(s.label)}</text>`)
    .join("\n");
  const body = [
    panel(series, (p) => p.cumulative_fraction, "Cumulative affected users", 0, "data-final-cumulative"),
    panel(series, (p) => p.infectious, "Users currently spreading", PANEL_HEIGHT, "data-final-infectious"),
    legend,
  ].join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" viewBox="0 0 ${WIDTH} ${height}" font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n${body}\n</svg>\n`;
}

export function renderBars(groups: BarGroup[]): string {
  if (groups.length === 0 || groups.every((g) => g.bars.length === 0)) {
    throw new SchemaError("no bar inputs given");
  }
  const labels = groups.flatMap((g, gi) => g.bars.map((b, bi) => `${gi}:${bi}`));
  const values = groups.flatMap((g) => g.bars.map((b) => b.value));
  const minValue = Math.min(0, ...values);
  const maxValue = Math.max(0, ...values);
  const height = 360;
  const x = scaleBand(labels, [MARGIN.left, WIDTH - MARGIN.right]).paddingInner(0.25).paddingOuter(0.2);
  const y = scaleLinear([minValue * 1.1 - 1e-9, maxValue * 1.1 + 1e-9],
                        [height - MARGIN.bottom, MARGIN.top]);
  const parts = [axisLeft(y.ticks(6), y, MARGIN.left, "%")];
  parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y(0))}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y(0))}" stroke="#333"/>`);
  groups.forEach((group, gi) => {
    group.bars.forEach((bar, bi) => {
      const key = `${gi}:${bi}`;
      const px = x(key);
      if (px === undefined) return;
      const top = Math.min(y(bar.value), y(0));
      const h = Math.abs(y(bar.value) - y(0));
      const color = PALETTE[gi % PALETTE.length];
      parts.push(
        `<rect x="${fmt(px)}" y="${fmt(top)}" width="${fmt(x.bandwidth())}" height="${fmt(h)}" ` +
          `fill="${color}" data-group="${esc(group.label)}" data-label="${esc(bar.label)}" data-value="${String(bar.value)}"/>`,
      );
      parts.push(
        `<text x="${fmt(px + x.bandwidth() / 2)}" y="${height - MARGIN.bottom + 14}" ` +
          `text-anchor="middle" font-size="9" transform="rotate(30 ${fmt(px + x.bandwidth() / 2)} ${height - MARGIN.bottom + 14})">${esc(bar.label)}</text>`,
      );
    });
  });
  const legend = groups
    .map((g, i) =>
      `<rect x="${MARGIN.left + 140 * i}" y="8" width="12" height="12" fill="${PALETTE[i % PALETTE.length]}"/>` +
      `<text x="${MARGIN.left + 140 * i + 16}" y="18" font-size="12">${esc(g.label)}</text>`)
    .join("\n");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" viewBox="0 0 ${WIDTH} ${height}" font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n${legend}\n${parts.join("\n")}\n</svg>\n`;
}
