// Pure view-model state: everything here is DOM-free and unit-tested.
//
// Two rules shape this module: widgets only ever render server-acknowledged
// state (a poll snapshot or a POST echo, never an optimistic guess), and
// chart time comes from the server's simulated clock, not the browser's.

import { DeviceStatus, Mode, StatusSnapshot, Thresholds } from "./types.js";

export const CHART_WINDOW_S = 600; // rolling window, simulated seconds
export const POLL_INTERVAL_MS = 1000;

export interface SeriesPoint {
  t: number;
  value: number;
}

/** Append one sample and drop everything older than the window. */
export function appendPoint(
  series: SeriesPoint[],
  t: number,
  value: number,
  windowS: number = CHART_WINDOW_S,
): SeriesPoint[] {
  const last = series[series.length - 1];
  if (last && t <= last.t) return series; // same tick polled twice
  const next = [...series, { t, value }];
  const cutoff = t - windowS;
  return next.filter((point) => point.t >= cutoff);
}

export interface RoomSeries {
  temp: SeriesPoint[];
  humidity: SeriesPoint[];
  lux: SeriesPoint[];
}

export class DashboardModel {
  snapshot: StatusSnapshot | null = null;
  stale = false;
  roomSeries = new Map<number, RoomSeries>();
  energySeries: SeriesPoint[] = [];

  /** Ingest a fresh /api/status snapshot. */
  pushSnapshot(snapshot: StatusSnapshot): void {
    this.snapshot = snapshot;
    this.stale = false;
    for (const room of snapshot.rooms) {
      let series = this.roomSeries.get(room.room_id);
      if (!series) {
        series = { temp: [], humidity: [], lux: [] };
        this.roomSeries.set(room.room_id, series);
      }
      series.temp = appendPoint(series.temp, snapshot.t, room.temp_c);
      series.humidity = appendPoint(series.humidity, snapshot.t, room.humidity_pct);
      series.lux = appendPoint(series.lux, snapshot.t, room.lux);
    }
    this.energySeries = appendPoint(this.energySeries, snapshot.t, snapshot.energy.cumulative_kwh);
  }

  /** A poll failed: keep the last data, flag it as stale. */
  markStale(): void {
    this.stale = true;
  }

  /** Merge a POST echo so controls reflect it before the next poll. */
  acknowledgeMode(deviceId: string, mode: Mode): void {
    const device = this.findDevice(deviceId);
    if (device) device.mode = mode;
  }

  acknowledgeDuty(deviceId: string, dutyPct: number): void {
    const device = this.findDevice(deviceId);
    if (device) device.manual_duty_pct = dutyPct;
  }

  findDevice(deviceId: string): DeviceStatus | null {
    for (const room of this.snapshot?.rooms ?? []) {
      for (const device of room.devices) {
        if (device.device_id === deviceId) return device;
      }
    }
    return null;
  }

  /** PWM slider is usable only once the server has acknowledged MANUAL. */
  sliderEnabled(deviceId: string): boolean {
    return this.findDevice(deviceId)?.mode === "MANUAL";
  }

  alarmActive(): boolean {
    return this.snapshot?.alarm_active ?? false;
  }
}

/** Client-side mirror of the server's threshold invariants.
 * Returns one message per offending field; empty object means valid. */
export function validateThresholds(form: Thresholds): Partial<Record<keyof Thresholds, string>> {
  const errors: Partial<Record<keyof Thresholds, string>> = {};
  for (const [field, value] of Object.entries(form) as [keyof Thresholds, number][]) {
    if (!Number.isFinite(value)) errors[field] = "must be a number";
  }
  if (errors.lux_full === undefined && form.lux_full < 0) {
    errors.lux_full = "must be >= 0";
  }
  if (!errors.lux_full && !errors.lux_off && form.lux_full >= form.lux_off) {
    errors.lux_full = "must be < lux_off";
  }
  if (!errors.fan_t1_c && !errors.fan_t2_c && form.fan_t1_c >= form.fan_t2_c) {
    errors.fan_t2_c = "must be > fan_t1_c";
  }
  if (!errors.fan_t2_c && !errors.fan_t3_c && form.fan_t2_c >= form.fan_t3_c) {
    errors.fan_t3_c = "must be > fan_t2_c";
  }
  if (!errors.fan_h3_pct && (form.fan_h3_pct < 0 || form.fan_h3_pct > 100)) {
    errors.fan_h3_pct = "must be within 0-100";
  }
  if (!errors.occupancy_hold_s && form.occupancy_hold_s < 0) {
    errors.occupancy_hold_s = "must be >= 0";
  }
  return errors;
}

/** Fixed-cadence poller with drop-if-busy: never more than one request in
 * flight, a slow response skips beats instead of queueing. */
export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;

  constructor(
    private readonly poll: () => Promise<void>,
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.timer) return;
    void this.beat();
    this.timer = setInterval(() => void this.beat(), this.intervalMs);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  private async beat(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      await this.poll();
    } finally {
      this.inFlight = false;
    }
  }
}
