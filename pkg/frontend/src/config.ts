// Console configuration: API base URL and token, taken from the URL query
// (?api=...&token=...) and remembered in localStorage, so a bookmarked
// console works without re-entering anything.

export interface ConsoleConfig {
  apiBase: string;
  token: string;
  refreshIntervalS: number;
}

const DEFAULT_REFRESH_S = 10;

export function resolveConfig(
  search: string,
  storage: Pick<Storage, "getItem" | "setItem">,
): ConsoleConfig {
  const params = new URLSearchParams(search);
  const apiBase =
    params.get("api") ?? storage.getItem("gridwatch.api") ?? "http://127.0.0.1:8920";
  const token = params.get("token") ?? storage.getItem("gridwatch.token") ?? "";
  const refresh = Number(
    params.get("refresh") ?? storage.getItem("gridwatch.refresh") ?? DEFAULT_REFRESH_S,
  );
  storage.setItem("gridwatch.api", apiBase);
  if (token) storage.setItem("gridwatch.token", token);
  return {
    apiBase: apiBase.replace(/\/$/, ""),
    token,
    refreshIntervalS: Number.isFinite(refresh) && refresh > 0
      ? refresh
      : DEFAULT_REFRESH_S,
  };
}
