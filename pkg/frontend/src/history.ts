// Metric history graphs: polyline segments with explicit breaks at gaps.

import { historyGeometry } from "./viewmodel.js";
import type { HistoryPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderHistory(
  container: HTMLElement,
  payload: HistoryPayload,
  width = 280,
  height = 60,
): void {
  container.replaceChildren();
  const geometry = historyGeometry(payload, width, height);
  if (geometry === null) {
    const span = document.createElement("span");
    span.className = "notice";
    span.textContent = "no data in window";
    container.appendChild(span);
    return;
  }
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "sparkline");
  for (const segment of geometry.segments) {
    if (segment.length === 1) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", segment[0].x.toFixed(1));
      dot.setAttribute("cy", segment[0].y.toFixed(1));
      dot.setAttribute("r", "1.5");
      dot.setAttribute("class", "spark-point");
      svg.appendChild(dot);
      continue;
    }
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute(
      "points",
      segment.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(" "),
    );
    line.setAttribute("class", "spark-line");
    svg.appendChild(line);
  }
  const caption = document.createElementNS(SVG_NS, "text");
  caption.setAttribute("x", "2");
  caption.setAttribute("y", "10");
  caption.setAttribute("class", "spark-caption");
  caption.textContent =
    `${payload.label}: ${geometry.vMin.toPrecision(3)}..` +
    `${geometry.vMax.toPrecision(3)}`;
  svg.appendChild(caption);
  container.appendChild(svg);
}
