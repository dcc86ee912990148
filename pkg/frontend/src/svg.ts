/**
 * Minimal deterministic SVG line charts.
 *
 * Everything is emitted from scratch so the output bytes depend only
 * on the input data: no timestamps, no random ids, no library version
 * strings. Each series group carries its plotted points verbatim in a
 * data-points attribute, which is what the tests read back to confirm
 * the figure shows exactly the CSV numbers.
 */

export interface Series {
  name: string;
  points: Array<[number, number]>;
  errors?: number[];
}

export interface Chart {
  xLabel: string;
  yLabel: string;
  series: Series[];
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 24, right: 18, bottom: 56, left: 76 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

function escapeAttr(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(v: number): string {
  return String(Number(v.toPrecision(6)));
}

function px(v: number): string {
  return v.toFixed(2);
}

/** Tick positions at a 1/2/5 step covering [min, max]. */
function niceTicks(min: number, max: number, count = 5): number[] {
  const span = max - min;
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === Infinity) {
    min = 0;
    max = 1;
  }
  if (min === max) {
    // a flat or single-point series still needs a drawable range
    const pad = Math.max(Math.abs(min) * 0.05, 1);
    min -= pad;
    max += pad;
  }
  return { min, max };
}

export function renderChart(chart: Chart): string {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of chart.series) {
    s.points.forEach(([x, y], i) => {
      xs.push(x);
      const e = s.errors?.[i] ?? 0;
      ys.push(y - e, y + e);
    });
  }
  const ex = extent(xs);
  const ey = extent(ys);
  const padY = (ey.max - ey.min) * 0.06;
  ey.min -= padY;
  ey.max += padY;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - ex.min) / (ex.max - ex.min)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - ey.min) / (ey.max - ey.min)) * plotH;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
  );
  out.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // grid and axis ticks
  for (const t of niceTicks(ex.min, ex.max)) {
    const x = px(sx(t));
    out.push(`<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#dddddd"/>`);
    out.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="12">${fmt(t)}</text>`,
    );
  }
  for (const t of niceTicks(ey.min, ey.max)) {
    const y = px(sy(t));
    out.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#dddddd"/>`);
    out.push(
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="12">${fmt(t)}</text>`,
    );
  }
  out.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444444"/>`,
  );
  out.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${escapeAttr(chart.xLabel)}</text>`,
  );
  out.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${escapeAttr(chart.yLabel)}</text>`,
  );

  chart.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length]!;
    const name = escapeAttr(s.name);
    const points = escapeAttr(JSON.stringify(s.points));
    out.push(`<g class="series" data-series="${name}" data-points="${points}">`);
    if (s.errors) {
      s.points.forEach(([x, y], i) => {
        const e = s.errors![i]!;
        if (e > 0) {
          const cx = px(sx(x));
          const y0 = px(sy(y - e));
          const y1 = px(sy(y + e));
          out.push(`<line x1="${cx}" y1="${y0}" x2="${cx}" y2="${y1}" stroke="${color}"/>`);
          for (const yy of [y0, y1]) {
            out.push(
              `<line x1="${px(sx(x) - 4)}" y1="${yy}" x2="${px(sx(x) + 4)}" y2="${yy}" stroke="${color}"/>`,
            );
          }
        }
      });
    }
    if (s.points.length > 1) {
      const path = s.points.map(([x, y]) => `${px(sx(x))},${px(sy(y))}`).join(" ");
      out.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    for (const [x, y] of s.points) {
      out.push(`<circle cx="${px(sx(x))}" cy="${px(sy(y))}" r="3" fill="${color}"/>`);
    }
    out.push(`</g>`);
  });

  // legend, top right, one row per series
  chart.series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length]!;
    const y = MARGIN.top + 16 + si * 18;
    const x = WIDTH - MARGIN.right - 190;
    out.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${color}" stroke-width="1.8"/>`);
    out.push(`<text x="${x + 28}" y="${y}" font-size="12">${escapeAttr(s.name)}</text>`);
  });

  out.push(`</svg>`);
  return out.join("\n") + "\n";
}
