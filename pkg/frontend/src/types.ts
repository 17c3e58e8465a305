// Payload shapes served by the status API (docs/api.md). The console never
// derives monitoring facts on its own: every rendered value originates in
// one of these fields.

export type StatusName = "OK" | "WARNING" | "CRITICAL" | "UNKNOWN";
export type ReachabilityName = "UP" | "DOWN" | "UNREACHABLE";
export type DotColor = "green" | "yellow" | "red" | "gray";
export type Role = "viewer" | "operator" | "admin";

export interface SiteRollup {
  site_name: string;
  latitude: number;
  longitude: number;
  vos: string[];
  worst_status: StatusName;
  dot_color: DotColor;
  counts: Record<StatusName, number>;
  any_acknowledged: boolean;
  any_downtime: boolean;
}

export interface MapPayload {
  sites: SiteRollup[];
}

interface StateFields {
  status: string;
  state_type: "SOFT" | "HARD";
  attempt: number;
  last_check: number | null;
  last_state_change: number | null;
  notification_number: number;
  acknowledged: boolean;
  in_downtime: boolean;
}

export interface HostEntry extends StateFields {
  host_name: string;
  address: string;
  parents: string[];
}

export interface ServiceEntry extends StateFields {
  host_name: string;
  description: string;
  metric_kind: string;
  vos: string[];
  effective_status: StatusName;
  perf_labels?: string[];
}

export interface SitePayload {
  site: SiteRollup;
  hosts: HostEntry[];
  services: ServiceEntry[];
}

export interface HistoryPayload {
  host: string;
  service: string;
  label: string;
  points: Array<[number, number | null]>;
}

export interface NotificationEntry {
  at: number;
  target: string;
  reason: "problem" | "recovery";
  number: number;
  contacts: string[];
  result: string;
}

export interface NotificationsPayload {
  notifications: NotificationEntry[];
}
