// Typed client for the control service; every call carries the session token.

import { ENERGY_CSV_HEADER, Mode, StatusSnapshot, Thresholds } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText || "request failed";
  }
}

export class ApiClient {
  token: string | null = null;

  constructor(private base: string = "") {}

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers: Record<string, string> = {
      ...(init.headers as Record<string, string> | undefined),
    };
    if (init.body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const response = await fetch(this.base + path, { ...init, headers });
    if (!response.ok) throw new ApiError(response.status, await errorDetail(response));
    return response;
  }

  async login(user: string, pass: string): Promise<void> {
    const response = await this.request("/api/login", {
      method: "POST",
      body: JSON.stringify({ user, pass }),
    });
    this.token = (await response.json()).token;
  }

  async logout(): Promise<void> {
    try {
      await this.request("/api/logout", { method: "POST" });
    } finally {
      this.token = null;
    }
  }

  async status(): Promise<StatusSnapshot> {
    return (await this.request("/api/status")).json();
  }

  async setMode(deviceId: string, mode: Mode): Promise<{ device_id: string; mode: Mode }> {
    return (
      await this.request(`/api/devices/${deviceId}/mode`, {
        method: "POST",
        body: JSON.stringify({ mode }),
      })
    ).json();
  }

  async setDuty(deviceId: string, dutyPct: number): Promise<{ device_id: string; duty_pct: number }> {
    return (
      await this.request(`/api/devices/${deviceId}/duty`, {
        method: "POST",
        body: JSON.stringify({ duty_pct: dutyPct }),
      })
    ).json();
  }

  async getThresholds(): Promise<Thresholds> {
    return (await this.request("/api/thresholds")).json();
  }

  async putThresholds(thresholds: Thresholds): Promise<Thresholds> {
    return (
      await this.request("/api/thresholds", {
        method: "PUT",
        body: JSON.stringify(thresholds),
      })
    ).json();
  }

  /** Fetches the energy log verbatim; refuses a payload that does not
   * start with the documented CSV header. */
  async exportCsv(): Promise<string> {
    const text = await (await this.request("/api/export.csv")).text();
    const firstLine = text.split("\n", 1)[0].trim();
    if (firstLine !== ENERGY_CSV_HEADER) {
      throw new ApiError(502, "export does not carry the energy log header");
    }
    return text;
  }
}
