// Pure view-model mapping: API payloads in, renderable structures out.
// Kept free of DOM and network so every rule here is unit-testable, and so
// the invariant "every rendered fact is an API field" stays checkable.

import type {
  DotColor,
  HistoryPayload,
  HostEntry,
  Role,
  ServiceEntry,
  SiteRollup,
} from "./types.js";

export interface MapDot {
  site: string;
  x: number;
  y: number;
  color: DotColor; // verbatim dot_color from the API, never recomputed
  title: string;
  anyAcknowledged: boolean;
  anyDowntime: boolean;
}

export function projectLatLon(
  lat: number,
  lon: number,
  width: number,
  height: number,
): { x: number; y: number } {
  // equirectangular: lon -180..180 across, lat 90..-90 down
  return {
    x: ((lon + 180) / 360) * width,
    y: ((90 - lat) / 180) * height,
  };
}

export function buildMapDots(
  rollups: SiteRollup[],
  width: number,
  height: number,
): MapDot[] {
  return rollups.map((r) => {
    const { x, y } = projectLatLon(r.latitude, r.longitude, width, height);
    const total =
      r.counts.OK + r.counts.WARNING + r.counts.CRITICAL + r.counts.UNKNOWN;
    return {
      site: r.site_name,
      x,
      y,
      color: r.dot_color,
      title: `${r.site_name}: ${r.worst_status} (${total} services)`,
      anyAcknowledged: r.any_acknowledged,
      anyDowntime: r.any_downtime,
    };
  });
}

export interface Badge {
  kind: "status" | "soft" | "ack" | "downtime";
  text: string;
  color: DotColor | "blue" | "purple";
}

const STATUS_COLOR: Record<string, DotColor> = {
  OK: "green",
  UP: "green",
  WARNING: "yellow",
  CRITICAL: "red",
  DOWN: "red",
  UNREACHABLE: "gray",
  UNKNOWN: "gray",
};

export function stateBadges(entry: {
  status: string;
  state_type: "SOFT" | "HARD";
  acknowledged: boolean;
  in_downtime: boolean;
}): Badge[] {
  const badges: Badge[] = [
    {
      kind: "status",
      text: entry.status,
      color: STATUS_COLOR[entry.status] ?? "gray",
    },
  ];
  if (entry.state_type === "SOFT") {
    badges.push({ kind: "soft", text: "SOFT", color: "blue" });
  }
  if (entry.acknowledged) {
    badges.push({ kind: "ack", text: "acknowledged", color: "blue" });
  }
  if (entry.in_downtime) {
    badges.push({ kind: "downtime", text: "downtime", color: "purple" });
  }
  return badges;
}

export function hostRowTitle(host: HostEntry): string {
  const parents = host.parents.length ? ` behind ${host.parents.join(", ")}` : "";
  return `${host.host_name} (${host.address})${parents}`;
}

export function serviceKey(service: ServiceEntry): string {
  return `${service.host_name}/${service.description}`;
}

export function actionsEnabled(role: Role | null): boolean {
  return role === "operator" || role === "admin";
}

export function roleHint(role: Role | null): string | null {
  if (actionsEnabled(role)) return null;
  if (role === "viewer") return "viewer tokens cannot submit operator actions";
  return "no valid token; actions unavailable";
}

// History polylines: split at gaps so the line breaks instead of dipping
// through zero or bridging missing data.
export type Segment = Array<[number, number]>;

export function segmentHistory(points: Array<[number, number | null]>): Segment[] {
  const segments: Segment[] = [];
  let current: Segment = [];
  for (const [t, v] of points) {
    if (v === null) {
      if (current.length) segments.push(current);
      current = [];
    } else {
      current.push([t, v]);
    }
  }
  if (current.length) segments.push(current);
  return segments;
}

export interface GraphGeometry {
  segments: Array<Array<{ x: number; y: number }>>;
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

export function historyGeometry(
  payload: HistoryPayload,
  width: number,
  height: number,
  pad = 4,
): GraphGeometry | null {
  const segments = segmentHistory(payload.points);
  const values = segments.flat();
  if (!values.length) return null;
  const ts = payload.points.map(([t]) => t);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  let vMin = Math.min(...values.map(([, v]) => v));
  let vMax = Math.max(...values.map(([, v]) => v));
  if (vMin === vMax) {
    vMin -= 1;
    vMax += 1;
  }
  const sx = (t: number) =>
    pad + ((t - tMin) / Math.max(tMax - tMin, 1e-9)) * (width - 2 * pad);
  const sy = (v: number) =>
    height - pad - ((v - vMin) / (vMax - vMin)) * (height - 2 * pad);
  return {
    segments: segments.map((seg) => seg.map(([t, v]) => ({ x: sx(t), y: sy(v) }))),
    tMin,
    tMax,
    vMin,
    vMax,
  };
}

export function staleBanner(
  lastSuccessAt: number | null,
  now: number,
  refreshIntervalS: number,
): string | null {
  if (lastSuccessAt === null) return "no data yet; waiting for the API";
  const age = (now - lastSuccessAt) / 1000;
  if (age <= refreshIntervalS * 2.5) return null;
  const when = new Date(lastSuccessAt).toISOString().replace(".000", "");
  return `stale data: last update ${when} (${Math.round(age)}s ago)`;
}

// External-command lines the action forms submit (grammar: docs/formats.md).
export function ackCommand(
  host: string,
  service: string | null,
  author: string,
  comment: string,
  nowS: number,
): string {
  const ts = Math.floor(nowS);
  return service === null
    ? `[${ts}] ACKNOWLEDGE_HOST_PROBLEM;${host};${author};${comment}`
    : `[${ts}] ACKNOWLEDGE_SVC_PROBLEM;${host};${service};${author};${comment}`;
}

export function downtimeCommand(
  host: string,
  service: string | null,
  startS: number,
  endS: number,
  author: string,
  comment: string,
  nowS: number,
): string {
  const ts = Math.floor(nowS);
  const scope = service === null ? host : `${host};${service}`;
  return `[${ts}] SCHEDULE_DOWNTIME;${scope};${startS};${endS};${author};${comment}`;
}

export function forceCheckCommand(
  host: string,
  service: string | null,
  nowS: number,
): string {
  const scope = service === null ? host : `${host};${service}`;
  return `[${Math.floor(nowS)}] FORCE_CHECK;${scope}`;
}

export function validateDowntimeWindow(
  startS: number,
  endS: number,
): string | null {
  if (!Number.isFinite(startS) || !Number.isFinite(endS)) {
    return "start and end must be numbers (epoch seconds)";
  }
  if (endS <= startS) return "downtime must end after it starts";
  return null;
}
