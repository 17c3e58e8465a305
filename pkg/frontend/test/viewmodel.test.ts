import { describe, expect, it } from "vitest";

import {
  ackCommand,
  actionsEnabled,
  buildMapDots,
  downtimeCommand,
  forceCheckCommand,
  historyGeometry,
  projectLatLon,
  roleHint,
  segmentHistory,
  staleBanner,
  stateBadges,
  validateDowntimeWindow,
} from "../src/viewmodel.js";
import type { SiteRollup } from "../src/types.js";

function rollup(overrides: Partial<SiteRollup>): SiteRollup {
  return {
    site_name: "site01",
    latitude: 44.5,
    longitude: 11.3,
    vos: ["atlas"],
    worst_status: "OK",
    dot_color: "green",
    counts: { OK: 3, WARNING: 0, CRITICAL: 0, UNKNOWN: 0 },
    any_acknowledged: false,
    any_downtime: false,
    ...overrides,
  };
}

describe("projection", () => {
  it("maps the corners of the world", () => {
    expect(projectLatLon(90, -180, 100, 50)).toEqual({ x: 0, y: 0 });
    expect(projectLatLon(-90, 180, 100, 50)).toEqual({ x: 100, y: 50 });
    expect(projectLatLon(0, 0, 100, 50)).toEqual({ x: 50, y: 25 });
  });
});

describe("map view model", () => {
  it("renders one dot per rollup with the served color, verbatim", () => {
    const rollups = [
      rollup({ site_name: "a", dot_color: "green", worst_status: "OK" }),
      rollup({ site_name: "b", dot_color: "red", worst_status: "CRITICAL" }),
      rollup({ site_name: "c", dot_color: "yellow", worst_status: "WARNING" }),
      rollup({ site_name: "d", dot_color: "gray", worst_status: "UNKNOWN" }),
    ];
    const dots = buildMapDots(rollups, 960, 480);
    expect(dots).toHaveLength(4);
    expect(dots.map((d) => d.color)).toEqual(["green", "red", "yellow", "gray"]);
    expect(dots.map((d) => d.site)).toEqual(["a", "b", "c", "d"]);
  });

  it("never recomputes severity: a contradictory payload keeps its color", () => {
    // if the server ever said OK-but-red, the console must show red
    const dots = buildMapDots(
      [rollup({ worst_status: "OK", dot_color: "red" })], 100, 50);
    expect(dots[0].color).toBe("red");
  });

  it("carries suppression flags through", () => {
    const dots = buildMapDots(
      [rollup({ any_acknowledged: true, any_downtime: true })], 100, 50);
    expect(dots[0].anyAcknowledged).toBe(true);
    expect(dots[0].anyDowntime).toBe(true);
  });
});

describe("badges", () => {
  it("maps every badge 1:1 to an API field", () => {
    const badges = stateBadges({
      status: "CRITICAL",
      state_type: "SOFT",
      acknowledged: true,
      in_downtime: true,
    });
    expect(badges.map((b) => b.kind)).toEqual(["status", "soft", "ack", "downtime"]);
    expect(badges[0].text).toBe("CRITICAL");
    expect(badges[0].color).toBe("red");
  });

  it("shows only the status badge for a clean HARD OK", () => {
    const badges = stateBadges({
      status: "OK",
      state_type: "HARD",
      acknowledged: false,
      in_downtime: false,
    });
    expect(badges).toHaveLength(1);
    expect(badges[0]).toMatchObject({ kind: "status", text: "OK", color: "green" });
  });

  it("colors reachability values like the map does", () => {
    expect(stateBadges({ status: "DOWN", state_type: "HARD",
                         acknowledged: false, in_downtime: false })[0].color)
      .toBe("red");
    expect(stateBadges({ status: "UNREACHABLE", state_type: "HARD",
                         acknowledged: false, in_downtime: false })[0].color)
      .toBe("gray");
  });
});

describe("role gating", () => {
  it("only operator and admin act", () => {
    expect(actionsEnabled("viewer")).toBe(false);
    expect(actionsEnabled("operator")).toBe(true);
    expect(actionsEnabled("admin")).toBe(true);
    expect(actionsEnabled(null)).toBe(false);
  });

  it("explains why buttons are disabled", () => {
    expect(roleHint("viewer")).toMatch(/viewer tokens/);
    expect(roleHint("operator")).toBeNull();
    expect(roleHint(null)).toMatch(/no valid token/);
  });
});

describe("history gaps", () => {
  it("splits segments at nulls, never bridging them", () => {
    const segments = segmentHistory([
      [0, 1], [10, 2], [20, null], [30, 3], [40, null], [50, null], [60, 4],
    ]);
    expect(segments).toEqual([[[0, 1], [10, 2]], [[30, 3]], [[60, 4]]]);
  });

  it("produces no zero substitution in geometry", () => {
    const geometry = historyGeometry(
      { host: "h", service: "s", label: "load",
        points: [[0, 5], [10, null], [20, 6]] }, 100, 50);
    expect(geometry).not.toBeNull();
    expect(geometry!.segments).toHaveLength(2);
    // a gap-bridging renderer would have one 3-point segment instead
    expect(geometry!.segments.map((s) => s.length)).toEqual([1, 1]);
    expect(geometry!.vMin).toBe(5);
    expect(geometry!.vMax).toBe(6);
  });

  it("yields null for all-gap windows", () => {
    expect(historyGeometry(
      { host: "h", service: "s", label: "x", points: [[0, null]] }, 10, 10))
      .toBeNull();
  });
});

describe("stale banner", () => {
  it("is quiet while data is fresh", () => {
    expect(staleBanner(1_000_000, 1_000_000 + 5_000, 10)).toBeNull();
  });
  it("reports the last-updated time once stale", () => {
    const text = staleBanner(1_000_000, 1_000_000 + 60_000, 10);
    expect(text).toMatch(/stale data/);
    expect(text).toMatch(/60s ago/);
  });
  it("mentions the missing first fetch", () => {
    expect(staleBanner(null, 5, 10)).toMatch(/no data yet/);
  });
});

describe("command builders", () => {
  it("builds acknowledge lines for services and hosts", () => {
    expect(ackCommand("ce01", "CPU", "jdoe", "known", 1000.7))
      .toBe("[1000] ACKNOWLEDGE_SVC_PROBLEM;ce01;CPU;jdoe;known");
    expect(ackCommand("rtr", null, "jdoe", "x", 1000.2))
      .toBe("[1000] ACKNOWLEDGE_HOST_PROBLEM;rtr;jdoe;x");
  });

  it("builds downtime windows", () => {
    expect(downtimeCommand("ce01", "CPU", 100, 200, "op", "rack move", 99))
      .toBe("[99] SCHEDULE_DOWNTIME;ce01;CPU;100;200;op;rack move");
    expect(downtimeCommand("ce01", null, 100, 200, "op", "c", 99))
      .toBe("[99] SCHEDULE_DOWNTIME;ce01;100;200;op;c");
  });

  it("builds force checks", () => {
    expect(forceCheckCommand("ce01", "CPU", 42)).toBe("[42] FORCE_CHECK;ce01;CPU");
    expect(forceCheckCommand("ce01", null, 42)).toBe("[42] FORCE_CHECK;ce01");
  });

  it("validates downtime windows before posting", () => {
    expect(validateDowntimeWindow(100, 200)).toBeNull();
    expect(validateDowntimeWindow(200, 100)).toMatch(/end after/);
    expect(validateDowntimeWindow(NaN, 100)).toMatch(/numbers/);
  });
});
