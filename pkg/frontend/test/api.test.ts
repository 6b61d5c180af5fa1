import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function stubClient(
  status: number,
  body: unknown,
): { client: ApiClient; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const fetchFn = (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return Promise.resolve(
      new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
      }),
    );
  };
  return { client: new ApiClient("http://test", fetchFn), calls };
}

describe("request building", () => {
  it("serializes detection params into the episodes query", async () => {
    const { client, calls } = stubClient(200, { episodes: [] });
    await client.episodes("alice", "bob", {
      sigma: 1,
      h: 2.5,
      from: 0,
      to: 100,
      epsilon: 0.05,
      epsilon_mode: "relative-to-peak",
    });
    const url = new URL(calls[0].url);
    expect(url.pathname).toBe("/api/pairs/alice/bob/episodes");
    expect(url.searchParams.get("h")).toBe("2.5");
    expect(url.searchParams.get("from")).toBe("0");
    expect(url.searchParams.get("epsilon_mode")).toBe("relative-to-peak");
    expect(url.searchParams.has("grid_n")).toBe(false); // unset params omitted
  });

  it("escapes entity ids in the path", async () => {
    const { client, calls } = stubClient(200, {});
    await client.profile("a/b", "c d", {});
    expect(calls[0].url).toBe("http://test/api/pairs/a%2Fb/c%20d/profile");
  });

  it("labels with a JSON PUT body", async () => {
    const { client, calls } = stubClient(200, { labels_total: 1 });
    await client.putLabel("s1", "ref9", "positive");
    expect(calls[0].init?.method).toBe("PUT");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      episode_ref: "ref9",
      label: "positive",
    });
  });

  it("passes the confidence floor and polarity to predictions", async () => {
    const { client, calls } = stubClient(200, { predictions: [] });
    await client.predictions("s1", "relevant", 0.9, "positive");
    const url = new URL(calls[0].url);
    expect(url.searchParams.get("min_confidence")).toBe("0.9");
    expect(url.searchParams.get("polarity")).toBe("positive");
  });
});

describe("error mapping", () => {
  it("surfaces the machine-readable code from error bodies", async () => {
    const { client } = stubClient(422, {
      code: "needs-both-classes",
      message: "training needs at least one example of each class",
    });
    const err = await client.train("s1", "relevant").catch((e) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("needs-both-classes");
    expect(err.status).toBe(422);
    expect(err.message).toContain("each class");
  });

  it("maps transport failures to a network error", async () => {
    const client = new ApiClient("http://test", () => Promise.reject(new Error("down")));
    const err = await client.health().catch((e) => e as ApiError);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("network");
    expect(err.status).toBe(0);
  });

  it("tolerates non-JSON error bodies", async () => {
    const fetchFn = () =>
      Promise.resolve(new Response("<html>oops</html>", { status: 500 }));
    const client = new ApiClient("http://test", fetchFn);
    const err = await client.health().catch((e) => e as ApiError);
    expect(err.code).toBe("error");
    expect(err.message).toBe("HTTP 500");
  });
});
