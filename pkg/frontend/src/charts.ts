// Tiny SVG chart builders: pure string output, no dependencies.

export interface Series {
  xs: number[];
  ys: number[];
}

export interface ChartSpec {
  width: number;
  height: number;
  pad: number;
  yMin?: number;
  yMax?: number;
}

export function scale(
  values: number[],
  lo: number,
  hi: number,
  outLo: number,
  outHi: number,
): number[] {
  const span = hi - lo || 1;
  return values.map((v) => outLo + ((v - lo) / span) * (outHi - outLo));
}

/** SVG path data for a polyline through the series points. */
export function linePath(series: Series, spec: ChartSpec): string {
  if (series.xs.length === 0) return "";
  const xLo = Math.min(...series.xs);
  const xHi = Math.max(...series.xs);
  const yLo = spec.yMin ?? Math.min(...series.ys, 0);
  const yHi = spec.yMax ?? Math.max(...series.ys, 1e-9);
  const xs = scale(series.xs, xLo, xHi, spec.pad, spec.width - spec.pad);
  // SVG y grows downward
  const ys = scale(series.ys, yLo, yHi, spec.height - spec.pad, spec.pad);
  return xs.map((x, i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
}

export function chartSvg(
  series: { data: Series; color: string; label: string }[],
  spec: ChartSpec,
): string {
  const paths = series
    .map(
      (s) =>
        `<path d="${linePath(s.data, spec)}" fill="none" stroke="${s.color}" stroke-width="2"/>`,
    )
    .join("");
  const legend = series
    .map(
      (s, i) =>
        `<text x="${spec.pad + 4}" y="${spec.pad + 14 * (i + 1)}" fill="${s.color}" font-size="11">${s.label}</text>`,
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${spec.width} ${spec.height}" xmlns="http://www.w3.org/2000/svg">` +
    `<rect x="${spec.pad}" y="${spec.pad}" width="${spec.width - 2 * spec.pad}" ` +
    `height="${spec.height - 2 * spec.pad}" fill="none" stroke="#ccc"/>` +
    paths +
    legend +
    `</svg>`
  );
}
