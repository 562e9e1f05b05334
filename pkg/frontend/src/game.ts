// Game flow: rounds against the engine. Every number and every reveal on
// this screen comes from a server response; the client never knows the
// truth until the resolution arrives.

import { GatewayError, type CountryInfo, type GameState, type RoundResolution } from "./api.js";

export interface GameGateway {
  createGame(rounds: number): Promise<GameState>;
  submitGuess(gameId: string, roundIndex: number, country: string): Promise<RoundResolution>;
  panoUrl(panoId: string): string;
}

export class GameController {
  private gateway: GameGateway;
  private root: HTMLElement;
  private countries: CountryInfo[];
  private game: GameState | null = null;
  private inFlight = false;
  private lastSelection: string | null = null;

  constructor(gateway: GameGateway, root: HTMLElement, countries: CountryInfo[]) {
    this.gateway = gateway;
    this.root = root;
    this.countries = countries;
  }

  async start(rounds: number): Promise<void> {
    this.root.innerHTML = '<div class="loading">Starting game…</div>';
    try {
      this.game = await this.gateway.createGame(rounds);
    } catch (err) {
      this.renderFatal(err);
      return;
    }
    this.renderRound();
  }

  // Applies a server resolution: the only place reveal data enters the DOM.
  private applyResolution(resolution: RoundResolution): void {
    this.game = resolution.game;
    this.renderRound(resolution);
  }

  private async submit(country: string): Promise<void> {
    if (this.inFlight || !this.game) return;
    const roundIndex = this.game.current_round;
    this.inFlight = true;
    this.lastSelection = country;
    this.setControlsDisabled(true);
    this.clearBanner();
    try {
      const resolution = await this.gateway.submitGuess(this.game.id, roundIndex, country);
      this.inFlight = false;
      this.applyResolution(resolution);
    } catch (err) {
      this.inFlight = false;
      if (err instanceof GatewayError && err.code === "state") {
        // Someone already resolved this round (e.g. another tab); the
        // current view is stale but the guess itself is moot.
        this.showBanner(`${err.message}; refresh to continue.`, false);
        return;
      }
      this.setControlsDisabled(false);
      const message =
        err instanceof GatewayError
          ? `${err.message} (${err.code})`
          : "Could not reach the server.";
      this.showBanner(message, true);
    }
  }

  private setControlsDisabled(disabled: boolean): void {
    const picker = this.root.querySelector<HTMLSelectElement>(".country-picker");
    const button = this.root.querySelector<HTMLButtonElement>(".submit-guess");
    if (picker) picker.disabled = disabled;
    if (button) button.disabled = disabled;
  }

  private clearBanner(): void {
    this.root.querySelector(".game-banner")?.remove();
  }

  private showBanner(message: string, retry: boolean): void {
    this.clearBanner();
    const banner = document.createElement("div");
    banner.className = "game-banner error-banner";
    const text = document.createElement("span");
    text.textContent = message;
    banner.appendChild(text);
    if (retry && this.lastSelection !== null) {
      const again = document.createElement("button");
      again.className = "retry";
      again.textContent = "Retry";
      again.addEventListener("click", () => {
        if (this.lastSelection !== null) void this.submit(this.lastSelection);
      });
      banner.appendChild(again);
    }
    this.root.querySelector(".game-panel")?.appendChild(banner);
  }

  private renderFatal(err: unknown): void {
    const message =
      err instanceof GatewayError ? `${err.message} (${err.code})` : "Could not start the game.";
    this.root.innerHTML = `<div class="error-banner">${message}</div>`;
  }

  private totalsLine(): string {
    if (!this.game) return "";
    return (
      `<div class="totals">You <strong class="user-total">${this.game.user_total}</strong>` +
      ` · Engine <strong class="system-total">${this.game.system_total}</strong></div>`
    );
  }

  private renderFinished(): void {
    if (!this.game) return;
    const { user_total, system_total } = this.game;
    const verdict =
      user_total > system_total
        ? "You beat the engine."
        : user_total < system_total
          ? "The engine wins this one."
          : "A draw.";
    this.root.innerHTML =
      `<div class="game-panel finished">` +
      `<h3>Game over</h3>${this.totalsLine()}` +
      `<p class="verdict">${verdict}</p>` +
      `<button class="new-game">Play again</button></div>`;
    this.root.querySelector(".new-game")?.addEventListener("click", () => {
      const rounds = this.game?.round_count ?? 3;
      void this.start(rounds);
    });
  }

  // Renders the current round; a resolution argument adds the reveal panel
  // for the round that just closed.
  private renderRound(resolution?: RoundResolution): void {
    if (!this.game) return;
    if (this.game.status === "finished" && !resolution) {
      this.renderFinished();
      return;
    }

    const showing = resolution ? resolution.round : this.game.rounds[this.game.current_round];
    if (!showing) {
      this.renderFinished();
      return;
    }

    const panel = document.createElement("div");
    panel.className = "game-panel";
    panel.innerHTML =
      `<div class="round-header">` +
      `<h3 class="round-title">Round ${showing.index + 1} of ${this.game.round_count}</h3>` +
      this.totalsLine() +
      `</div>` +
      `<figure class="pano"><img src="${this.gateway.panoUrl(showing.pano_id)}" ` +
      `alt="Round ${showing.index + 1} panorama"></figure>`;

    if (resolution) {
      panel.appendChild(this.buildReveal(resolution));
      const next = document.createElement("button");
      next.className = "next-round";
      next.textContent =
        this.game.status === "finished" ? "See final score" : "Next round";
      next.addEventListener("click", () => this.renderRound());
      panel.appendChild(next);
    } else {
      panel.appendChild(this.buildPickerForm());
    }

    this.root.innerHTML = "";
    this.root.appendChild(panel);
  }

  private buildPickerForm(): HTMLElement {
    const form = document.createElement("form");
    form.className = "guess-form";
    const picker = document.createElement("select");
    picker.className = "country-picker";
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "Where is this?";
    picker.appendChild(placeholder);
    for (const country of this.countries) {
      const option = document.createElement("option");
      option.value = country.code;
      option.textContent = country.name;
      picker.appendChild(option);
    }
    const button = document.createElement("button");
    button.type = "submit";
    button.className = "submit-guess";
    button.textContent = "Lock in";
    form.appendChild(picker);
    form.appendChild(button);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      if (picker.value) void this.submit(picker.value);
    });
    return form;
  }

  private nameOf(code: string | null): string {
    if (code === null) return "?";
    return this.countries.find((c) => c.code === code)?.name ?? code;
  }

  private buildReveal(resolution: RoundResolution): HTMLElement {
    const round = resolution.round;
    const reveal = document.createElement("div");
    reveal.className = "reveal";
    const correct = round.user_guess === round.truth;
    reveal.innerHTML =
      `<p class="truth">It was <strong>${this.nameOf(round.truth)}</strong>.</p>` +
      `<table class="reveal-scores"><tbody>` +
      `<tr class="${correct ? "hit" : "miss"}">` +
      `<td>You guessed ${this.nameOf(round.user_guess)}</td>` +
      `<td class="user-points">${round.user_points ?? 0}</td></tr>` +
      `<tr><td>Engine ranked it #${round.system_rank ?? "?"}` +
      ` (top pick ${this.nameOf(round.system_top1)})</td>` +
      `<td class="system-points">${round.system_points ?? 0}</td></tr>` +
      `</tbody></table>`;
    return reveal;
  }
}
