import { describe, expect, it } from "vitest";

import { Gateway, GatewayError } from "../src/api.js";

interface Captured {
  url: string;
  init?: RequestInit;
}

function fakeFetch(response: Response, captured: Captured[]) {
  return async (url: string, init?: RequestInit) => {
    captured.push({ url, init });
    return response;
  };
}

function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("Gateway", () => {
  it("fetches the country registry", async () => {
    const captured: Captured[] = [];
    const gateway = new Gateway(
      fakeFetch(jsonResponse([{ code: "AA", name: "Country AA" }]), captured),
    );
    const countries = await gateway.countries();
    expect(captured[0]!.url).toBe("/api/countries");
    expect(countries[0]!.name).toBe("Country AA");
  });

  it("posts panorama ids as JSON", async () => {
    const captured: Captured[] = [];
    const gateway = new Gateway(
      fakeFetch(jsonResponse({ ranking: [], per_module: {}, weights_used: {}, abstentions: [] }), captured),
    );
    await gateway.guessById("p3");
    const init = captured[0]!.init!;
    expect(captured[0]!.url).toBe("/api/guess");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({ panorama_id: "p3" });
  });

  it("uploads images as multipart with the offset field", async () => {
    const captured: Captured[] = [];
    const gateway = new Gateway(
      fakeFetch(jsonResponse({ ranking: [], per_module: {}, weights_used: {}, abstentions: [] }), captured),
    );
    await gateway.guessByUpload(new Blob([new Uint8Array([1, 2, 3])]), 90);
    const body = captured[0]!.init!.body as FormData;
    expect(body).toBeInstanceOf(FormData);
    expect(body.get("image")).toBeInstanceOf(Blob);
    expect(body.get("north_offset_deg")).toBe("90");
  });

  it("omits the offset field when no offset is given", async () => {
    const captured: Captured[] = [];
    const gateway = new Gateway(
      fakeFetch(jsonResponse({ ranking: [], per_module: {}, weights_used: {}, abstentions: [] }), captured),
    );
    await gateway.guessByUpload(new Blob([new Uint8Array([1])]), null);
    const body = captured[0]!.init!.body as FormData;
    expect(body.get("north_offset_deg")).toBeNull();
  });

  it("builds game routes", async () => {
    const captured: Captured[] = [];
    const resolution = { round: {}, game: {} };
    const gateway = new Gateway(fakeFetch(jsonResponse(resolution), captured));
    await gateway.submitGuess("abc", 2, "DE");
    expect(captured[0]!.url).toBe("/api/game/abc/rounds/2/guess");
    expect(JSON.parse(captured[0]!.init!.body as string)).toEqual({ country: "DE" });
  });

  it("turns {code, message} error bodies into GatewayError", async () => {
    const gateway = new Gateway(
      fakeFetch(jsonResponse({ code: "not_found", message: "unknown panorama id" }, 404), []),
    );
    const err = await gateway.guessById("p99").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(GatewayError);
    expect((err as GatewayError).code).toBe("not_found");
    expect((err as GatewayError).message).toBe("unknown panorama id");
    expect((err as GatewayError).status).toBe(404);
  });

  it("falls back to an unknown code for non-JSON errors", async () => {
    const gateway = new Gateway(async () => new Response("<html>boom</html>", { status: 500 }));
    const err = await gateway.countries().catch((e: unknown) => e);
    expect((err as GatewayError).code).toBe("unknown");
    expect((err as GatewayError).message).toBe("HTTP 500");
  });

  it("encodes panorama ids in pano URLs", () => {
    const gateway = new Gateway(async () => jsonResponse({}));
    expect(gateway.panoUrl("p 1")).toBe("/api/pano/p%201");
  });
});
