// @vitest-environment happy-dom
// Round trip against a real server instance: accept/reject decisions must
// land in the server history (checked through the history endpoint and the
// dataset export), re-renders must follow server re-ranking, a pair
// rejected five times must never render again, and submission without both
// confidence selections must stay blocked.
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { AnnotatorApp } from "../src/app";
import type { SuggestionCard } from "../src/types";

const PORT = 8700 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const TASKS = 8;

let server: ChildProcess | null = null;
let dataDir: string;
let serverLog = "";

function taxonomyDocument(): string {
  const lines = [
    JSON.stringify({ format: "taxonomy", version: 1 }),
    JSON.stringify({
      code: "B01",
      label: "bridge",
      description: "structure carrying a road",
      synonyms: [],
      parent_code: null,
    }),
    JSON.stringify({
      code: "B02",
      label: "road bridge",
      description: "bridge for road traffic",
      synonyms: [],
      parent_code: null,
    }),
  ];
  return lines.join("\n") + "\n";
}

function requirementsDocument(): string {
  const lines = [JSON.stringify({ format: "requirements", version: 1 })];
  for (let i = 0; i < TASKS; i += 1) {
    lines.push(JSON.stringify({ id: `R${i}`, text: `Bridge section ${"abcdefgh"[i]}` }));
  }
  return lines.join("\n") + "\n";
}

async function rawJson(path: string): Promise<Record<string, unknown>> {
  const response = await fetch(`${BASE}${path}`);
  return (await response.json()) as Record<string, unknown>;
}

async function waitForServer(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 400)); // let uvicorn bind first
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/v1/history`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`server did not come up on ${BASE}\n${serverLog}`);
}

beforeAll(async () => {
  dataDir = await mkdtemp(join(tmpdir(), "tracerec-ui-"));
  await writeFile(join(dataDir, "taxonomy.jsonl"), taxonomyDocument(), "utf-8");
  await writeFile(join(dataDir, "requirements.jsonl"), requirementsDocument(), "utf-8");
  server = spawn(
    "tracerec",
    [
      "serve",
      "--host", "127.0.0.1",
      "--port", String(PORT),
      "--taxonomy", join(dataDir, "taxonomy.jsonl"),
      "--requirements", join(dataDir, "requirements.jsonl"),
      "--language", "en",
      "--stemmer", "identity",
    ],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk) => (serverLog += String(chunk)));
  server.stderr?.on("data", (chunk) => (serverLog += String(chunk)));
  await waitForServer();
}, 60_000);

afterAll(async () => {
  server?.kill("SIGTERM");
  await new Promise((resolve) => setTimeout(resolve, 300));
  await rm(dataDir, { recursive: true, force: true });
});

function cardFor(app: AnnotatorApp, code: string): SuggestionCard {
  if (app.view.kind !== "task") {
    throw new Error(`expected a task view, got ${app.view.kind}`);
  }
  const card = app.view.cards.find((c) => c.code === code);
  if (!card) {
    throw new Error(`no live card for ${code}`);
  }
  return card;
}

function renderedCodes(root: HTMLElement): (string | null)[] {
  return [...root.querySelectorAll('[data-testid="card"]')].map((node) =>
    node.getAttribute("data-code"),
  );
}

function clickConfidence(root: HTMLElement, which: string, value: string): void {
  (root.querySelector(
    `[data-testid="confidence-${which}"] [data-value="${value}"]`,
  ) as HTMLButtonElement).click();
}

describe("UI round trip against a live server", () => {
  it(
    "drives decisions, re-ranking, suppression and gated submission",
    async () => {
      const root = document.createElement("div");
      document.body.appendChild(root);
      const api = new ApiClient(BASE);
      const app = new AnnotatorApp(api, root);
      await app.start("ui-tester", "ccr");

      // Task 1: both objects suggested; the tie breaks by code.
      expect(renderedCodes(root)).toEqual(["B01", "B02"]);

      // Accept (bridge -> B02): the server records it and the re-rendered
      // list no longer carries the decided pair.
      await app.decide(cardFor(app, "B02"), "accept");
      expect(renderedCodes(root)).toEqual(["B01"]);
      let history = (await rawJson("/v1/history")).pairs as Record<string, unknown>[];
      expect(history).toContainEqual({ stem: "bridge", code: "B02", accepts: 1, rejects: 0 });

      clickConfidence(root, "correct", "-1");
      clickConfidence(root, "complete", "0");
      await app.submit();

      // Task 2: the accepted pair now outscores the other via the history
      // predictor, so the server re-ranks B02 above B01 and the UI renders
      // that order verbatim.
      expect(app.view.kind).toBe("task");
      expect(renderedCodes(root)).toEqual(["B02", "B01"]);

      // Reject (bridge -> B01) on five consecutive tasks.
      for (let task = 2; task <= 6; task += 1) {
        expect(renderedCodes(root)).toContain("B01");
        await app.decide(cardFor(app, "B01"), "reject");
        expect(renderedCodes(root)).not.toContain("B01");
        clickConfidence(root, "correct", "0");
        clickConfidence(root, "complete", "0");
        await app.submit();
      }
      history = (await rawJson("/v1/history")).pairs as Record<string, unknown>[];
      expect(history).toContainEqual({ stem: "bridge", code: "B01", accepts: 0, rejects: 5 });

      // Task 7: the pair hit the rejection threshold; it is suppressed
      // server-side and never re-renders.
      expect(app.view.kind).toBe("task");
      expect(renderedCodes(root)).toEqual(["B02"]);

      // Submission without the confidence selections stays blocked: an
      // inline prompt appears and the server receives nothing.
      await app.submit();
      expect(root.querySelector('[data-testid="submit-prompt"]')).not.toBeNull();
      let exportText = await (await fetch(`${BASE}/v1/export`)).text();
      expect(exportText.trim().split("\n").length).toBe(1 + 6); // header + six records

      clickConfidence(root, "correct", "1");
      await app.submit(); // still only one of two scales selected
      expect(root.querySelector('[data-testid="submit-prompt"]')).not.toBeNull();

      clickConfidence(root, "complete", "-2");
      await app.submit();
      exportText = await (await fetch(`${BASE}/v1/export`)).text();
      const rows = exportText.trim().split("\n");
      expect(rows.length).toBe(1 + 7);
      // the accepted association from task 1 round-trips through the export
      expect(rows[1]).toContain("bridge:B02");
      expect(rows[1]).toContain("ui-tester,ccr,R0");

      // Finish the remaining task and reach the completion screen.
      expect(app.view.kind).toBe("task");
      clickConfidence(root, "correct", "0");
      clickConfidence(root, "complete", "0");
      await app.submit();
      expect(root.querySelector('[data-testid="done"]')?.textContent).toContain("8 of 8");
    },
    60_000,
  );
});
