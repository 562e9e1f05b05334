// Ranking view: the fused country list with per-module contribution bars
// and expandable evidence explanations.

import { GatewayError, type GuessReport, type ModuleScores } from "./api.js";

export interface Contribution {
  moduleId: string;
  amount: number;
}

export interface RankingRowView {
  code: string;
  name: string;
  score: number;
  contributions: Contribution[];
}

// Stable palette per module id; unknown ids fall back by hash.
const MODULE_COLORS: Record<string, string> = {
  color: "#e4572e",
  solar: "#f3a712",
  textlang: "#29335c",
  caption: "#669bbc",
  object: "#7a9e7e",
  plate: "#9b5de5",
};

function moduleColor(moduleId: string): string {
  const fixed = MODULE_COLORS[moduleId];
  if (fixed) return fixed;
  let hash = 0;
  for (const ch of moduleId) hash = (hash * 31 + ch.charCodeAt(0)) % 360;
  return `hsl(${hash}, 55%, 45%)`;
}

function isRecordOfNumbers(value: unknown): value is Record<string, number> {
  return (
    typeof value === "object" &&
    value !== null &&
    Object.values(value).every((v) => typeof v === "number")
  );
}

export function isGuessReport(value: unknown): value is GuessReport {
  if (typeof value !== "object" || value === null) return false;
  const doc = value as Partial<GuessReport>;
  if (!Array.isArray(doc.ranking) || doc.ranking.length === 0) return false;
  for (const row of doc.ranking) {
    if (typeof row?.code !== "string" || typeof row?.score !== "number") return false;
  }
  if (typeof doc.per_module !== "object" || doc.per_module === null) return false;
  if (!isRecordOfNumbers(doc.weights_used)) return false;
  if (!Array.isArray(doc.abstentions)) return false;
  return true;
}

// Each module's share of a country's fused score: weight * module score.
// The weights the server reports are already renormalized over the modules
// that voted, so the shares add up to the fused score.
export function buildRankingView(
  report: GuessReport,
  names: Map<string, string>,
  topN = 10,
): RankingRowView[] {
  const active = Object.entries(report.per_module).filter(([, m]) => !m.abstained);
  return report.ranking.slice(0, topN).map((entry) => ({
    code: entry.code,
    name: names.get(entry.code) ?? entry.code,
    score: entry.score,
    contributions: active.map(([moduleId, module]) => ({
      moduleId,
      amount: (report.weights_used[moduleId] ?? 0) * (module.scores[entry.code] ?? 0),
    })),
  }));
}

export function renderErrorBanner(container: HTMLElement, message: string): void {
  container.innerHTML = "";
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = message;
  container.appendChild(banner);
}

function renderModuleDetails(moduleId: string, module: ModuleScores, names: Map<string, string>): HTMLElement {
  const details = document.createElement("details");
  details.className = "module-details";
  const summary = document.createElement("summary");
  summary.innerHTML =
    `<span class="swatch" style="background:${moduleColor(moduleId)}"></span>` +
    `${moduleId}${module.abstained ? " (abstained)" : ""}`;
  details.appendChild(summary);
  const body = document.createElement("div");
  for (const note of module.notes) {
    const p = document.createElement("p");
    p.className = "module-note";
    p.textContent = note;
    body.appendChild(p);
  }
  if (!module.abstained) {
    const top = Object.entries(module.scores)
      .sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]))
      .slice(0, 3);
    const list = document.createElement("ul");
    for (const [code, score] of top) {
      const li = document.createElement("li");
      li.textContent = `${names.get(code) ?? code}: ${(score * 100).toFixed(1)}%`;
      list.appendChild(li);
    }
    body.appendChild(list);
  }
  details.appendChild(body);
  return details;
}

export function renderGuess(
  response: unknown,
  container: HTMLElement,
  names: Map<string, string>,
  topN = 10,
): void {
  if (!isGuessReport(response)) {
    renderErrorBanner(container, "The server response was malformed; nothing to display.");
    return;
  }
  container.innerHTML = "";
  const report = response;

  const moduleCount = Object.keys(report.per_module).length;
  if (moduleCount > 0 && report.abstentions.length === moduleCount) {
    const notice = document.createElement("div");
    notice.className = "uniform-notice";
    notice.textContent =
      "Every evidence module abstained, so all countries are equally likely.";
    container.appendChild(notice);
  }

  const rows = buildRankingView(report, names, topN);
  const maxScore = rows.length ? Math.max(...rows.map((r) => r.score)) : 1;
  const table = document.createElement("ol");
  table.className = "ranking";
  rows.forEach((row) => {
    const item = document.createElement("li");
    item.className = "ranking-row";
    item.dataset.code = row.code;
    item.dataset.score = String(row.score);

    const label = document.createElement("div");
    label.className = "row-label";
    label.innerHTML =
      `<span class="code">${row.code}</span>` +
      `<span class="name">${row.name}</span>` +
      `<span class="score">${(row.score * 100).toFixed(1)}%</span>`;
    item.appendChild(label);

    // Stacked bar: one segment per non-abstained module, widths relative to
    // the leading score so the top row spans the track.
    const bar = document.createElement("div");
    bar.className = "bar";
    for (const part of row.contributions) {
      if (part.amount <= 0) continue;
      const segment = document.createElement("span");
      segment.className = "bar-segment";
      segment.dataset.module = part.moduleId;
      segment.dataset.amount = String(part.amount);
      segment.style.width = `${(100 * part.amount) / maxScore}%`;
      segment.style.background = moduleColor(part.moduleId);
      segment.title = `${part.moduleId}: ${(part.amount * 100).toFixed(2)}%`;
      bar.appendChild(segment);
    }
    item.appendChild(bar);
    table.appendChild(item);
  });
  container.appendChild(table);

  const evidence = document.createElement("section");
  evidence.className = "evidence";
  const heading = document.createElement("h3");
  heading.textContent = "Evidence by module";
  evidence.appendChild(heading);
  for (const [moduleId, module] of Object.entries(report.per_module)) {
    evidence.appendChild(renderModuleDetails(moduleId, module, names));
  }
  container.appendChild(evidence);
}

// Awaits a guess request and renders either the ranking or an error banner.
export async function showGuess(
  pending: Promise<unknown>,
  container: HTMLElement,
  names: Map<string, string>,
  topN = 10,
): Promise<void> {
  container.innerHTML = '<div class="loading">Scoring…</div>';
  let response: unknown;
  try {
    response = await pending;
  } catch (err) {
    const message =
      err instanceof GatewayError
        ? `${err.message} (${err.code})`
        : "The request failed; check the connection and try again.";
    renderErrorBanner(container, message);
    return;
  }
  renderGuess(response, container, names, topN);
}
