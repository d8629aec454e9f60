/** Minimal SVG construction: string building, no DOM.  Every logical layer
 * of a figure is a <g> with class "layer layer-<name>", which is what the
 * self-test mode and the test suite count. */

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, body = ""): string {
  const rendered = Object.entries(attrs)
    .map(([k, v]) => `${k}="${v}"`)
    .join(" ");
  return body === ""
    ? `<${tag} ${rendered}/>`
    : `<${tag} ${rendered}>${body}</${tag}>`;
}

export function layer(name: string, label: string, body: string): string {
  return el("g", { class: `layer layer-${name}`, "data-label": label }, body);
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    // degenerate extent (single-point inputs): widen symmetrically
    d0 -= 1;
    d1 += 1;
  }
  const f = ((v: number) =>
    range[0] + ((v - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function extent(values: number[]): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v));
  if (finite.length === 0) {
    throw new Error("no finite values to scale");
  }
  return [Math.min(...finite), Math.max(...finite)];
}

export function pathFrom(points: Array<[number, number]>): string {
  return points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(2)},${y.toFixed(2)}`)
    .join("");
}

export function polylineEl(points: Array<[number, number]>, color: string,
                           width = 1.5): string {
  if (points.length === 1) {
    return el("circle", {
      cx: points[0][0].toFixed(2), cy: points[0][1].toFixed(2), r: 3,
      fill: color,
    });
  }
  return el("path", {
    d: pathFrom(points), fill: "none", stroke: color, "stroke-width": width,
  });
}

export function star(cx: number, cy: number, r: number, color: string): string {
  const pts: string[] = [];
  for (let i = 0; i < 10; i++) {
    const radius = i % 2 === 0 ? r : r / 2.4;
    const angle = (Math.PI / 5) * i - Math.PI / 2;
    pts.push(`${(cx + radius * Math.cos(angle)).toFixed(2)},`
      + `${(cy + radius * Math.sin(angle)).toFixed(2)}`);
  }
  return el("polygon", { points: pts.join(" "), fill: color });
}

export function text(x: number, y: number, content: string,
                     size = 10): string {
  return el("text", { x: x.toFixed(2), y: y.toFixed(2), "font-size": size },
            content);
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#7f7f7f",
];

export interface Frame {
  width: number;
  height: number;
  margin: number;
  x: Scale;
  y: Scale;
}

export function makeFrame(width: number, height: number,
                          xDomain: [number, number],
                          yDomain: [number, number],
                          margin = 45): Frame {
  return {
    width,
    height,
    margin,
    x: linearScale(xDomain, [margin, width - margin]),
    y: linearScale(yDomain, [height - margin, margin]),
  };
}

function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    out.push(lo + ((hi - lo) * i) / count);
  }
  return out;
}

export function axesLayer(frame: Frame, xLabel: string,
                          yLabel: string): string {
  const { x, y, width, height, margin } = frame;
  const parts: string[] = [];
  parts.push(el("rect", {
    x: margin, y: margin, width: width - 2 * margin,
    height: height - 2 * margin, fill: "none", stroke: "#333",
    "stroke-width": 1,
  }));
  for (const t of ticks(x.domain)) {
    parts.push(text(x(t) - 10, height - margin + 14, t.toPrecision(3), 8));
  }
  for (const t of ticks(y.domain)) {
    parts.push(text(4, y(t) + 3, t.toPrecision(3), 8));
  }
  parts.push(text(width / 2 - 20, height - 8, xLabel));
  parts.push(el("text", {
    x: 12, y: height / 2,
    "font-size": 10,
    transform: `rotate(-90 12 ${height / 2})`,
  }, yLabel));
  return layer("axes", "axes", parts.join(""));
}

export function legendLayer(entries: Array<[string, string]>,
                            frame: Frame): string {
  const items = entries.map(([label, color], i) =>
    el("rect", {
      x: frame.width - frame.margin - 110,
      y: frame.margin + 8 + 14 * i, width: 10, height: 10, fill: color,
    })
    + text(frame.width - frame.margin - 96, frame.margin + 17 + 14 * i,
           label, 9));
  return layer("legend", "legend", items.join(""));
}

export function document(width: number, height: number, title: string,
                         body: string): string {
  const head = el("rect", {
    x: 0, y: 0, width, height, fill: "white",
  }) + (title ? text(10, 16, title, 12) : "");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" `
    + `height="${height}" viewBox="0 0 ${width} ${height}">${head}${body}`
    + `</svg>`;
}
