import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { ENERGY_CSV_HEADER } from "../src/types.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("stores the token from login and sends it on later calls", async () => {
    const fetchMock = vi
      .fn()
      .mockResolvedValueOnce(jsonResponse({ token: "tok123", expires_at: "x" }))
      .mockResolvedValueOnce(jsonResponse({ t: 0, rooms: [] }));
    vi.stubGlobal("fetch", fetchMock);

    const client = new ApiClient();
    await client.login("admin", "admin");
    expect(client.token).toBe("tok123");
    expect(fetchMock.mock.calls[0][0]).toBe("/api/login");
    expect(JSON.parse(fetchMock.mock.calls[0][1].body)).toEqual({ user: "admin", pass: "admin" });

    await client.status();
    const headers = fetchMock.mock.calls[1][1].headers as Record<string, string>;
    expect(headers["Authorization"]).toBe("Bearer tok123");
  });

  it("raises ApiError with the server detail on failures", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse({ detail: "invalid credentials" }, 401)));
    const client = new ApiClient();
    await expect(client.login("admin", "wrong")).rejects.toMatchObject({
      status: 401,
      detail: "invalid credentials",
    });
  });

  it("clears the token on logout even if the request fails", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse({ detail: "boom" }, 500)));
    const client = new ApiClient();
    client.token = "tok";
    await expect(client.logout()).rejects.toBeInstanceOf(ApiError);
    expect(client.token).toBeNull();
  });

  it("posts mode and duty with exact field names", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ device_id: "fan_1", mode: "MANUAL" }));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient();
    await client.setMode("fan_1", "MANUAL");
    expect(fetchMock.mock.calls[0][0]).toBe("/api/devices/fan_1/mode");
    expect(JSON.parse(fetchMock.mock.calls[0][1].body)).toEqual({ mode: "MANUAL" });

    fetchMock.mockResolvedValue(jsonResponse({ device_id: "fan_1", duty_pct: 55 }));
    await client.setDuty("fan_1", 55);
    expect(JSON.parse(fetchMock.mock.calls[1][1].body)).toEqual({ duty_pct: 55 });
  });

  it("passes the CSV export through untouched when the header matches", async () => {
    const payload = `${ENERGY_CSV_HEADER}\n2025-01-01T00:00:30Z,1,25.00,50.00,500.0,1,,50,40,0.037500,0.166667,0.000408,0.000\n`;
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(new Response(payload, { status: 200 })));
    const client = new ApiClient();
    const csv = await client.exportCsv();
    expect(csv).toBe(payload);
    expect(csv.startsWith("timestamp,room,temp_c,humidity_pct,lux,motion,smoke,")).toBe(true);
  });

  it("rejects an export without the documented header", async () => {
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(new Response("time,stuff\n1,2\n", { status: 200 })));
    const client = new ApiClient();
    await expect(client.exportCsv()).rejects.toMatchObject({ status: 502 });
  });
});
