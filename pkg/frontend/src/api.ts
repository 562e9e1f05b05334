// Typed client for the countryrank HTTP API. Every shape here mirrors the
// server's JSON documents one to one; nothing is computed client-side.

export interface CountryInfo {
  code: string;
  name: string;
}

export interface RankingEntry {
  code: string;
  score: number;
}

export interface ModuleScores {
  module_id: string;
  abstained: boolean;
  scores: Record<string, number>;
  notes: string[];
}

export interface GuessReport {
  ranking: RankingEntry[];
  per_module: Record<string, ModuleScores>;
  weights_used: Record<string, number>;
  abstentions: string[];
}

export interface RoundState {
  index: number;
  pano_id: string;
  resolved: boolean;
  truth: string | null;
  user_guess: string | null;
  system_top1: string | null;
  system_rank: number | null;
  user_points: number | null;
  system_points: number | null;
}

export interface GameState {
  id: string;
  status: string;
  current_round: number;
  round_count: number;
  rounds: RoundState[];
  user_total: number;
  system_total: number;
}

export interface RoundResolution {
  round: RoundState;
  game: GameState;
}

export class GatewayError extends Error {
  code: string;
  status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Gateway {
  private fetchFn: FetchLike;
  private base: string;

  constructor(fetchFn?: FetchLike, base = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
    this.base = base;
  }

  panoUrl(panoId: string): string {
    return `${this.base}/api/pano/${encodeURIComponent(panoId)}`;
  }

  async countries(): Promise<CountryInfo[]> {
    return this.request<CountryInfo[]>("/api/countries", {});
  }

  async guessById(panoId: string): Promise<GuessReport> {
    return this.request<GuessReport>("/api/guess", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ panorama_id: panoId }),
    });
  }

  async guessByUpload(image: Blob, northOffsetDeg: number | null): Promise<GuessReport> {
    const form = new FormData();
    form.append("image", image, "panorama.png");
    if (northOffsetDeg !== null) {
      form.append("north_offset_deg", String(northOffsetDeg));
    }
    return this.request<GuessReport>("/api/guess", { method: "POST", body: form });
  }

  async createGame(rounds: number): Promise<GameState> {
    return this.request<GameState>("/api/game", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ rounds }),
    });
  }

  async gameState(gameId: string): Promise<GameState> {
    return this.request<GameState>(`/api/game/${encodeURIComponent(gameId)}`, {});
  }

  async submitGuess(gameId: string, roundIndex: number, country: string): Promise<RoundResolution> {
    const path = `/api/game/${encodeURIComponent(gameId)}/rounds/${roundIndex}/guess`;
    return this.request<RoundResolution>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ country }),
    });
  }

  private async request<T>(path: string, init: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      // Error bodies are {code, message}; anything else becomes "unknown".
      let code = "unknown";
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { code?: string; message?: string };
        if (typeof body.code === "string") code = body.code;
        if (typeof body.message === "string") message = body.message;
      } catch {
        // keep the fallbacks
      }
      throw new GatewayError(code, message, response.status);
    }
    return (await response.json()) as T;
  }
}
