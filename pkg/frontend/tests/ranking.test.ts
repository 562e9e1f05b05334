import { beforeEach, describe, expect, it } from "vitest";

import { GatewayError, type GuessReport } from "../src/api.js";
import { renderGuess, showGuess } from "../src/ranking.js";

import countriesDoc from "./fixtures/countries.json";
import goldenDoc from "./fixtures/golden_guess.json";

const golden = goldenDoc as unknown as GuessReport;
const names = new Map(
  (countriesDoc as { code: string; name: string }[]).map((c) => [c.code, c.name]),
);

let container: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  container = document.createElement("div");
  document.body.appendChild(container);
});

function rowCodes(): string[] {
  return [...container.querySelectorAll<HTMLElement>("li.ranking-row")].map(
    (li) => li.dataset.code ?? "",
  );
}

describe("renderGuess", () => {
  it("renders rows in exactly the server's ranking order", () => {
    renderGuess(golden, container, names);
    expect(rowCodes()).toEqual(golden.ranking.slice(0, 10).map((r) => r.code));
  });

  it("is stable across repeated renders", () => {
    renderGuess(golden, container, names);
    const first = container.innerHTML;
    renderGuess(golden, container, names);
    expect(container.innerHTML).toBe(first);
  });

  it("shows ten rows by default and honours a smaller topN", () => {
    renderGuess(golden, container, names);
    expect(rowCodes()).toHaveLength(10);
    renderGuess(golden, container, names, 3);
    expect(rowCodes()).toHaveLength(3);
  });

  it("labels rows with registry names and percentage scores", () => {
    renderGuess(golden, container, names);
    const top = container.querySelector("li.ranking-row")!;
    const topEntry = golden.ranking[0]!;
    expect(top.querySelector(".name")!.textContent).toBe(names.get(topEntry.code));
    expect(top.querySelector(".score")!.textContent).toBe(
      `${(topEntry.score * 100).toFixed(1)}%`,
    );
  });

  it("decomposes each bar into segments that sum to the fused score", () => {
    renderGuess(golden, container, names);
    for (const li of container.querySelectorAll<HTMLElement>("li.ranking-row")) {
      const score = Number(li.dataset.score);
      const segmentSum = [...li.querySelectorAll<HTMLElement>(".bar-segment")]
        .map((seg) => Number(seg.dataset.amount))
        .reduce((a, b) => a + b, 0);
      expect(Math.abs(segmentSum - score)).toBeLessThan(1e-9);
    }
  });

  it("shows a uniform notice when every module abstains", () => {
    const moduleIds = Object.keys(golden.per_module);
    const codes = golden.ranking.map((r) => r.code).sort();
    const uniform: GuessReport = {
      ranking: codes.map((code) => ({ code, score: 1 / codes.length })),
      per_module: Object.fromEntries(
        moduleIds.map((id) => [
          id,
          { module_id: id, abstained: true, scores: {}, notes: "no evidence" },
        ]),
      ),
      weights_used: golden.weights_used,
      abstentions: moduleIds,
    };
    renderGuess(uniform, container, names);
    expect(container.querySelector(".uniform-notice")).not.toBeNull();
    expect(rowCodes()).toHaveLength(10);
  });

  it("shows an error banner for malformed responses without throwing", () => {
    renderGuess({ surprise: true } as unknown as GuessReport, container, names);
    expect(container.querySelector(".error-banner")).not.toBeNull();
    expect(container.querySelector("li.ranking-row")).toBeNull();

    renderGuess(
      { ...golden, ranking: [] } as unknown as GuessReport,
      container,
      names,
    );
    expect(container.querySelector(".error-banner")).not.toBeNull();
  });
});

describe("showGuess", () => {
  it("renders the report once the request resolves", async () => {
    await showGuess(Promise.resolve(golden), container, names);
    expect(rowCodes()).toEqual(golden.ranking.slice(0, 10).map((r) => r.code));
  });

  it("surfaces gateway errors with their code", async () => {
    const failure = Promise.reject(
      new GatewayError("not_found", "unknown panorama id", 404),
    );
    await showGuess(failure, container, names);
    const banner = container.querySelector(".error-banner")!;
    expect(banner.textContent).toContain("unknown panorama id");
    expect(banner.textContent).toContain("not_found");
  });

  it("uses a generic message for transport failures", async () => {
    await showGuess(Promise.reject(new TypeError("fetch failed")), container, names);
    expect(container.querySelector(".error-banner")!.textContent).toContain(
      "request failed",
    );
  });
});
