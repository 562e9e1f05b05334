// Page bootstrap: tab switching and wiring the gateway to the two views.

import { Gateway, type CountryInfo } from "./api.js";
import { GameController } from "./game.js";
import { renderErrorBanner, showGuess } from "./ranking.js";

function buildGuessTab(
  gateway: Gateway,
  view: HTMLElement,
  names: Map<string, string>,
): void {
  view.innerHTML = `
    <form class="upload-form">
      <label class="file-label">Panorama image (2:1 equirectangular)
        <input type="file" accept="image/png,image/jpeg" class="pano-file">
      </label>
      <label class="offset-label">North offset (degrees, optional)
        <input type="number" step="any" class="north-offset" placeholder="e.g. 90">
      </label>
      <button type="submit" class="run-guess">Rank countries</button>
    </form>
    <div class="guess-result"></div>`;

  const form = view.querySelector<HTMLFormElement>(".upload-form")!;
  const fileInput = view.querySelector<HTMLInputElement>(".pano-file")!;
  const offsetInput = view.querySelector<HTMLInputElement>(".north-offset")!;
  const result = view.querySelector<HTMLElement>(".guess-result")!;

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const file = fileInput.files?.[0];
    if (!file) {
      renderErrorBanner(result, "Pick an image first.");
      return;
    }
    const offset = offsetInput.value === "" ? null : Number(offsetInput.value);
    if (offset !== null && !Number.isFinite(offset)) {
      renderErrorBanner(result, "The north offset must be a number.");
      return;
    }
    void showGuess(gateway.guessByUpload(file, offset), result, names);
  });
}

function buildGameTab(gateway: Gateway, view: HTMLElement, countries: CountryInfo[]): void {
  view.innerHTML = `
    <form class="start-form">
      <label>Rounds
        <input type="number" min="1" max="10" value="3" class="round-count">
      </label>
      <button type="submit" class="start-game">Start game</button>
    </form>
    <div class="game-root"></div>`;

  const form = view.querySelector<HTMLFormElement>(".start-form")!;
  const roundsInput = view.querySelector<HTMLInputElement>(".round-count")!;
  const gameRoot = view.querySelector<HTMLElement>(".game-root")!;
  const controller = new GameController(gateway, gameRoot, countries);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const rounds = Number(roundsInput.value);
    if (!Number.isInteger(rounds) || rounds < 1) return;
    void controller.start(rounds);
  });
}

async function boot(app: HTMLElement): Promise<void> {
  const gateway = new Gateway();
  let countries: CountryInfo[];
  try {
    countries = await gateway.countries();
  } catch {
    app.innerHTML =
      '<div class="error-banner">Could not load the country registry; is the service running?</div>';
    return;
  }
  const names = new Map(countries.map((c) => [c.code, c.name]));

  app.innerHTML = `
    <nav class="tabs">
      <button class="tab active" data-tab="guess">Guess</button>
      <button class="tab" data-tab="game">Play the engine</button>
    </nav>
    <section class="view" id="view-guess"></section>
    <section class="view hidden" id="view-game"></section>`;

  const guessView = app.querySelector<HTMLElement>("#view-guess")!;
  const gameView = app.querySelector<HTMLElement>("#view-game")!;
  buildGuessTab(gateway, guessView, names);
  buildGameTab(gateway, gameView, countries);

  app.querySelectorAll<HTMLButtonElement>(".tab").forEach((button) => {
    button.addEventListener("click", () => {
      app.querySelectorAll(".tab").forEach((b) => b.classList.remove("active"));
      button.classList.add("active");
      guessView.classList.toggle("hidden", button.dataset.tab !== "guess");
      gameView.classList.toggle("hidden", button.dataset.tab !== "game");
    });
  });
}

const app = document.getElementById("app");
if (app) void boot(app);
