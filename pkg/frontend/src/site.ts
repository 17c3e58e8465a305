// Site drill-down: host/service tables with status badges and the operator
// action forms (acknowledge, schedule downtime, force check).

import { ApiClient, ApiError } from "./api.js";
import { renderHistory } from "./history.js";
import {
  ackCommand,
  actionsEnabled,
  downtimeCommand,
  forceCheckCommand,
  hostRowTitle,
  roleHint,
  stateBadges,
  validateDowntimeWindow,
} from "./viewmodel.js";
import type { Role, ServiceEntry, SitePayload } from "./types.js";

export interface SiteCallbacks {
  onBack(): void;
  onRefresh(): void;
}

function badgeSpan(badge: { text: string; color: string; kind: string }): HTMLElement {
  const span = document.createElement("span");
  span.className = `badge badge-${badge.kind} badge-${badge.color}`;
  span.textContent = badge.text;
  return span;
}

function actionError(cell: HTMLElement, message: string): void {
  let note = cell.querySelector<HTMLElement>(".action-error");
  if (!note) {
    note = document.createElement("div");
    note.className = "action-error";
    cell.appendChild(note);
  }
  note.textContent = message;
}

export function renderSite(
  container: HTMLElement,
  payload: SitePayload,
  api: ApiClient,
  role: Role | null,
  callbacks: SiteCallbacks,
): void {
  container.replaceChildren();
  const canAct = actionsEnabled(role);

  const heading = document.createElement("div");
  heading.className = "site-heading";
  const back = document.createElement("button");
  back.textContent = "< map";
  back.addEventListener("click", () => callbacks.onBack());
  heading.appendChild(back);
  const title = document.createElement("h2");
  title.textContent = `${payload.site.site_name} - ${payload.site.worst_status}`;
  heading.appendChild(title);
  const vos = document.createElement("span");
  vos.className = "vos";
  vos.textContent = payload.site.vos.length ? `VOs: ${payload.site.vos.join(", ")}` : "";
  heading.appendChild(vos);
  container.appendChild(heading);

  const hint = roleHint(role);
  if (hint) {
    const note = document.createElement("p");
    note.className = "role-hint";
    note.textContent = hint;
    container.appendChild(note);
  }

  const hostTable = document.createElement("table");
  hostTable.className = "hosts";
  hostTable.createCaption().textContent = "hosts";
  for (const host of payload.hosts) {
    const row = hostTable.insertRow();
    row.insertCell().textContent = hostRowTitle(host);
    const badgeCell = row.insertCell();
    for (const badge of stateBadges(host)) badgeCell.appendChild(badgeSpan(badge));
    badgeCell.dataset.target = host.host_name;
    row.insertCell().appendChild(
      actionCell(api, role, canAct, host.host_name, null, callbacks),
    );
  }
  container.appendChild(hostTable);

  const svcTable = document.createElement("table");
  svcTable.className = "services";
  svcTable.createCaption().textContent = "services";
  for (const service of payload.services) {
    const row = svcTable.insertRow();
    row.insertCell().textContent = `${service.host_name}/${service.description}`;
    const badgeCell = row.insertCell();
    for (const badge of stateBadges(service)) badgeCell.appendChild(badgeSpan(badge));
    badgeCell.dataset.target = `${service.host_name}/${service.description}`;
    const sparkCell = row.insertCell();
    sparkCell.className = "spark-cell";
    loadSparkline(api, service, sparkCell);
    row.insertCell().appendChild(
      actionCell(api, role, canAct, service.host_name, service.description,
                 callbacks),
    );
  }
  container.appendChild(svcTable);
}

function loadSparkline(
  api: ApiClient,
  service: ServiceEntry,
  cell: HTMLElement,
): void {
  const label = service.perf_labels?.[0];
  if (!label) {
    cell.textContent = "";
    return;
  }
  const nowS = Date.now() / 1000;
  api
    .history(service.host_name, service.description, label, nowS - 3600, nowS)
    .then((payload) => renderHistory(cell, payload))
    .catch(() => {
      cell.textContent = "";
    });
}

function actionCell(
  api: ApiClient,
  role: Role | null,
  canAct: boolean,
  host: string,
  service: string | null,
  callbacks: SiteCallbacks,
): HTMLElement {
  const cell = document.createElement("div");
  cell.className = "actions";

  const submit = (line: string) => {
    api
      .postCommand(line)
      .then(() => callbacks.onRefresh())
      .catch((error: unknown) => {
        if (error instanceof ApiError && error.status === 403) {
          actionError(cell, roleHint(role) ?? "insufficient role");
        } else if (error instanceof ApiError) {
          actionError(cell, error.message);
        } else {
          actionError(cell, String(error));
        }
      });
  };

  const ack = document.createElement("button");
  ack.textContent = "ack";
  ack.disabled = !canAct;
  ack.title = canAct ? "acknowledge the current problem" : roleHint(role) ?? "";
  ack.addEventListener("click", () => {
    const author = prompt("your name?") ?? "";
    const comment = prompt("comment?") ?? "";
    if (!author) return;
    submit(ackCommand(host, service, author, comment, Date.now() / 1000));
  });
  cell.appendChild(ack);

  const downtime = document.createElement("button");
  downtime.textContent = "downtime";
  downtime.disabled = !canAct;
  downtime.title = canAct ? "schedule a maintenance window" : roleHint(role) ?? "";
  downtime.addEventListener("click", () => {
    const minutes = Number(prompt("minutes of downtime, starting now?") ?? "0");
    const author = prompt("your name?") ?? "";
    const comment = prompt("comment?") ?? "";
    const startS = Math.floor(Date.now() / 1000);
    const endS = startS + Math.floor(minutes * 60);
    const problem = validateDowntimeWindow(startS, endS);
    if (problem) {
      actionError(cell, problem);
      return;
    }
    submit(downtimeCommand(host, service, startS, endS, author, comment, startS));
  });
  cell.appendChild(downtime);

  const force = document.createElement("button");
  force.textContent = "recheck";
  force.disabled = !canAct;
  force.addEventListener("click", () =>
    submit(forceCheckCommand(host, service, Date.now() / 1000)),
  );
  cell.appendChild(force);

  return cell;
}
