// Console conformance against a running daemon + simulator: dots on the map
// equal /api/map's dot_color verbatim, an acknowledgement flips the badge
// within one poll, and viewer tokens get disabled action buttons.
//
// The stack is the real Python daemon with real loopback agents, spawned as
// a child process; requests go through the console's own ApiClient.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, type ChildProcess } from "node:child_process";

import { ApiClient, ApiError } from "../src/api.js";
import {
  ackCommand,
  actionsEnabled,
  buildMapDots,
  stateBadges,
} from "../src/viewmodel.js";
import type { Role } from "../src/types.js";

const POLL_INTERVAL_MS = 1000; // the console's one-poll budget for this stack

let stack: ChildProcess;
let apiPort = 0;
let brokenHost = "";

function waitForReady(child: ChildProcess): Promise<void> {
  return new Promise((resolve, reject) => {
    const timer = setTimeout(
      () => reject(new Error("stack did not come up")), 30_000);
    let buffer = "";
    child.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const ready = buffer.match(/READY (\d+)/);
      const broken = buffer.match(/BROKEN (\S+)/);
      if (ready) apiPort = Number(ready[1]);
      if (broken) brokenHost = broken[1];
      if (apiPort && brokenHost) {
        clearTimeout(timer);
        resolve();
      }
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`stack exited early (${code})`));
    });
  });
}

async function until<T>(
  probe: () => Promise<T | null>,
  timeoutMs: number,
  stepMs = 100,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const value = await probe();
    if (value !== null) return value;
    if (Date.now() > deadline) throw new Error("condition not met in time");
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
}

beforeAll(async () => {
  stack = spawn("python3", [new URL("./stack.py", import.meta.url).pathname],
                { stdio: ["ignore", "pipe", "inherit"] });
  await waitForReady(stack);
}, 40_000);

afterAll(() => {
  stack?.kill("SIGINT");
});

describe("console conformance", () => {
  it("renders one dot per site with colors equal to the API's dot_color",
     async () => {
    const api = new ApiClient(`http://127.0.0.1:${apiPort}`, "viewer-token");
    // wait for the broken GRIS service to confirm so the map shows red
    const payload = await until(async () => {
      const map = await api.map(null, null);
      return map.sites.some((s) => s.dot_color === "red") ? map : null;
    }, 15_000);

    const dots = buildMapDots(payload.sites, 960, 480);
    expect(dots).toHaveLength(payload.sites.length);
    expect(dots).toHaveLength(3);
    const colorBySite = new Map(payload.sites.map((s) => [s.site_name, s.dot_color]));
    for (const dot of dots) {
      expect(dot.color).toBe(colorBySite.get(dot.site));
    }
  }, 20_000);

  it("flips the acknowledged badge within one poll of submitting the ack",
     async () => {
    const viewer = new ApiClient(`http://127.0.0.1:${apiPort}`, "viewer-token");
    const operator = new ApiClient(`http://127.0.0.1:${apiPort}`, "operator-token");

    // find the confirmed-critical service the stack promised us
    const target = await until(async () => {
      const map = await viewer.map(null, null);
      for (const rollup of map.sites) {
        const site = await viewer.site(rollup.site_name);
        const service = site.services.find(
          (s) => s.host_name === brokenHost && s.status === "CRITICAL" &&
                 s.state_type === "HARD");
        if (service) return { site: rollup.site_name, service };
      }
      return null;
    }, 15_000);

    const before = stateBadges(target.service);
    expect(before.some((b) => b.kind === "ack")).toBe(false);

    await operator.postCommand(ackCommand(
      target.service.host_name, target.service.description,
      "console-e2e", "known issue", Date.now() / 1000));

    const flipped = await until(async () => {
      const site = await viewer.site(target.site);
      const service = site.services.find(
        (s) => s.host_name === target.service.host_name &&
               s.description === target.service.description)!;
      const badges = stateBadges(service);
      return badges.some((b) => b.kind === "ack") ? badges : null;
    }, POLL_INTERVAL_MS);
    expect(flipped.some((b) => b.text === "acknowledged")).toBe(true);
  }, 20_000);

  it("disables action buttons for viewer tokens and keeps them for operators",
     async () => {
    const viewer = new ApiClient(`http://127.0.0.1:${apiPort}`, "viewer-token");
    const operator = new ApiClient(`http://127.0.0.1:${apiPort}`, "operator-token");

    const viewerRole: Role = (await viewer.whoami()).role;
    const operatorRole: Role = (await operator.whoami()).role;
    expect(viewerRole).toBe("viewer");
    expect(operatorRole).toBe("operator");
    // this predicate is exactly what site.ts wires into button.disabled
    expect(actionsEnabled(viewerRole)).toBe(false);
    expect(actionsEnabled(operatorRole)).toBe(true);

    // and the server fails closed even if a client ignored the gate
    await expect(
      viewer.postCommand(`[1] FORCE_CHECK;${brokenHost}`),
    ).rejects.toMatchObject({ status: 403 });
    expect(
      await operator.postCommand(`[1] FORCE_CHECK;${brokenHost}`).then(() => "ok"),
    ).toBe("ok");
  }, 20_000);

  it("rejects bad tokens with 401 so the console can show its banner",
     async () => {
    const bogus = new ApiClient(`http://127.0.0.1:${apiPort}`, "wrong-token");
    try {
      await bogus.map(null, null);
      expect.unreachable("expected a 401");
    } catch (error) {
      expect(error).toBeInstanceOf(ApiError);
      expect((error as ApiError).status).toBe(401);
    }
  });
});
