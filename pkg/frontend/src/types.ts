// Shapes of the control service's JSON payloads.

export type Mode = "AUTO" | "MANUAL" | "ON" | "OFF";

export interface DeviceStatus {
  device_id: string;
  kind: "led" | "fan" | "buzzer";
  mode: Mode;
  manual_duty_pct: number;
  applied_duty_pct: number;
}

export interface RoomStatus {
  room_id: number;
  temp_c: number;
  humidity_pct: number;
  lux: number;
  motion: boolean;
  smoke: boolean | null;
  occupancy_effective: boolean;
  devices: DeviceStatus[];
}

export interface EnergyTotals {
  cumulative_kwh: number;
  cumulative_cost_gbp: number;
  tariff_gbp_per_kwh: number;
}

export interface StatusSnapshot {
  t: number;
  timestamp: string;
  rooms: RoomStatus[];
  alarm_active: boolean;
  energy: EnergyTotals;
}

export interface Thresholds {
  lux_off: number;
  lux_full: number;
  fan_t1_c: number;
  fan_t2_c: number;
  fan_t3_c: number;
  fan_h3_pct: number;
  occupancy_hold_s: number;
}

// First line of every energy log export; the server contract.
export const ENERGY_CSV_HEADER =
  "timestamp,room,temp_c,humidity_pct,lux,motion,smoke,led_duty_pct,fan_duty_pct,led_wh,fan_wh,cum_kwh,cum_cost_gbp";
