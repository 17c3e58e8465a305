// World map panel: static outline + one status dot per site.

import { buildMapDots, projectLatLon } from "./viewmodel.js";
import { WORLD_OUTLINE } from "./worldOutline.js";
import type { SiteRollup } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onSiteClick(site: string): void;
}

export function renderMap(
  container: HTMLElement,
  rollups: SiteRollup[],
  width: number,
  height: number,
  callbacks: MapCallbacks,
): void {
  container.replaceChildren();
  if (!rollups.length) {
    const notice = document.createElement("p");
    notice.className = "notice";
    notice.textContent = "no sites configured";
    container.appendChild(notice);
    return;
  }
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "world-map");

  for (const ring of WORLD_OUTLINE) {
    const path = document.createElementNS(SVG_NS, "path");
    const d = ring
      .map(([lon, lat], i) => {
        const { x, y } = projectLatLon(lat, lon, width, height);
        return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    path.setAttribute("d", d + " Z");
    path.setAttribute("class", "continent");
    svg.appendChild(path);
  }

  for (const dot of buildMapDots(rollups, width, height)) {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", dot.x.toFixed(1));
    circle.setAttribute("cy", dot.y.toFixed(1));
    circle.setAttribute("r", "6");
    // the API decides the color; the console only paints it
    circle.setAttribute("fill", dot.color);
    circle.setAttribute("class", "site-dot");
    if (dot.anyAcknowledged || dot.anyDowntime) {
      circle.setAttribute("stroke", "#3b6ea5");
      circle.setAttribute("stroke-width", "2");
      circle.setAttribute("stroke-dasharray", dot.anyDowntime ? "3 2" : "");
    }
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = dot.title;
    circle.appendChild(title);
    circle.addEventListener("click", () => callbacks.onSiteClick(dot.site));
    svg.appendChild(circle);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", (dot.x + 8).toFixed(1));
    label.setAttribute("y", (dot.y + 4).toFixed(1));
    label.setAttribute("class", "site-label");
    label.textContent = dot.site;
    svg.appendChild(label);
  }
  container.appendChild(svg);
}
