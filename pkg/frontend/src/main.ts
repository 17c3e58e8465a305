// Console entry point: hash routing between the map and site views, one
// poll loop per view with a single in-flight fetch, stale-data banner.

import { ApiClient, ApiError, SingleFlight } from "./api.js";
import { resolveConfig } from "./config.js";
import { renderMap } from "./map.js";
import { renderSite } from "./site.js";
import { staleBanner } from "./viewmodel.js";
import type { Role } from "./types.js";

const METRIC_KINDS = ["", "cpu", "disk", "mem", "processes", "network_service",
                      "grid_service", "info_service", "other"];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function main(): void {
  const config = resolveConfig(window.location.search, window.localStorage);
  const api = new ApiClient(config.apiBase, config.token);
  const content = el<HTMLElement>("content");
  const banner = el<HTMLElement>("banner");
  const voSelect = el<HTMLSelectElement>("vo-filter");
  const metricSelect = el<HTMLSelectElement>("metric-filter");
  for (const kind of METRIC_KINDS) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = kind || "(all metrics)";
    metricSelect.appendChild(option);
  }

  let role: Role | null = null;
  let lastSuccessAt: number | null = null;
  let knownVos = new Set<string>();
  const flight = new SingleFlight();

  const currentSite = (): string | null => {
    const match = window.location.hash.match(/^#\/site\/(.+)$/);
    return match ? decodeURIComponent(match[1]) : null;
  };

  const updateBanner = (problem?: string) => {
    const text =
      problem ?? staleBanner(lastSuccessAt, Date.now(), config.refreshIntervalS);
    banner.textContent = text ?? "";
    banner.hidden = !text;
  };

  const refreshVoOptions = (vos: Iterable<string>) => {
    const fresh = new Set(vos);
    if (fresh.size === knownVos.size &&
        [...fresh].every((v) => knownVos.has(v))) {
      return;
    }
    knownVos = fresh;
    const selected = voSelect.value;
    voSelect.replaceChildren();
    const all = document.createElement("option");
    all.value = "";
    all.textContent = "(all VOs)";
    voSelect.appendChild(all);
    for (const vo of [...fresh].sort()) {
      const option = document.createElement("option");
      option.value = vo;
      option.textContent = vo;
      voSelect.appendChild(option);
    }
    voSelect.value = selected;
  };

  const poll = async () => {
    await flight.run(async () => {
      try {
        const site = currentSite();
        if (site !== null) {
          const payload = await api.site(site);
          renderSite(content, payload, api, role, {
            onBack: () => {
              window.location.hash = "#/map";
            },
            onRefresh: () => void poll(),
          });
        } else {
          const payload = await api.map(voSelect.value || null,
                                        metricSelect.value || null);
          refreshVoOptions(payload.sites.flatMap((s) => s.vos));
          renderMap(content, payload.sites, 960, 480, {
            onSiteClick: (name) => {
              window.location.hash = `#/site/${encodeURIComponent(name)}`;
            },
          });
        }
        lastSuccessAt = Date.now();
        updateBanner();
      } catch (error) {
        if (error instanceof ApiError && error.status === 401) {
          updateBanner("unauthorized: pass ?token=... (see tokens.tsv)");
        } else {
          updateBanner();
        }
      }
    });
  };

  api
    .whoami()
    .then((body) => {
      role = body.role;
      el<HTMLElement>("role-tag").textContent = `role: ${body.role}`;
    })
    .catch(() => {
      el<HTMLElement>("role-tag").textContent = "role: (no valid token)";
    })
    .finally(() => void poll());

  window.addEventListener("hashchange", () => void poll());
  voSelect.addEventListener("change", () => void poll());
  metricSelect.addEventListener("change", () => void poll());
  window.setInterval(() => void poll(), config.refreshIntervalS * 1000);
  window.setInterval(() => updateBanner(), 1000);
}

main();
