// DOM wiring: login flow, 1 Hz polling, widget updates, control actions.
// All state transitions live in model.ts; this file only reads the model
// and forwards user actions to the API client.

import { ApiClient, ApiError } from "./api.js";
import { drawChart } from "./charts.js";
import { DashboardModel, Poller, validateThresholds } from "./model.js";
import { Mode, StatusSnapshot, Thresholds } from "./types.js";

const client = new ApiClient();
const model = new DashboardModel();
const poller = new Poller(poll);

const app = document.getElementById("app") as HTMLElement;

const THRESHOLD_FIELDS: (keyof Thresholds)[] = [
  "lux_off",
  "lux_full",
  "fan_t1_c",
  "fan_t2_c",
  "fan_t3_c",
  "fan_h3_pct",
  "occupancy_hold_s",
];

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

// ---- login view ----

function showLogin(message = ""): void {
  poller.stop();
  client.token = null;
  app.innerHTML = `
    <div class="login-box">
      <h1>smarthome</h1>
      <form id="login-form">
        <label>User <input id="login-user" autocomplete="username" value="admin"></label>
        <label>Password <input id="login-pass" type="password" autocomplete="current-password"></label>
        <button type="submit">Log in</button>
        <p class="error" id="login-error">${message}</p>
      </form>
    </div>`;
  el<HTMLFormElement>("login-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await client.login(el<HTMLInputElement>("login-user").value, el<HTMLInputElement>("login-pass").value);
      await enterDashboard();
    } catch (error) {
      el("login-error").textContent = error instanceof ApiError ? error.detail : String(error);
    }
  });
}

// ---- dashboard skeleton (rendered once per login) ----

async function enterDashboard(): Promise<void> {
  let snapshot: StatusSnapshot;
  try {
    snapshot = await client.status();
  } catch (error) {
    if (error instanceof ApiError && error.status === 503) {
      app.innerHTML = `<p class="hint">service is starting, retrying...</p>`;
      setTimeout(() => void enterDashboard(), 500);
      return;
    }
    throw error;
  }
  model.pushSnapshot(snapshot);
  renderSkeleton(snapshot);
  try {
    fillThresholdForm(await client.getThresholds());
  } catch {
    /* threshold panel stays editable; next save surfaces the error */
  }
  poller.start();
}

function renderSkeleton(snapshot: StatusSnapshot): void {
  const rooms = snapshot.rooms
    .map(
      (room) => `
      <section class="room" id="room-${room.room_id}">
        <h2>Room ${room.room_id}
          <span class="pill" id="occupancy-${room.room_id}"></span>
        </h2>
        <div class="readings">
          <div>Temp <strong id="temp-${room.room_id}"></strong> °C</div>
          <div>Humidity <strong id="humidity-${room.room_id}"></strong> %</div>
          <div>Light <strong id="lux-${room.room_id}"></strong> lx</div>
          <div>Motion <strong id="motion-${room.room_id}"></strong></div>
          <div>Smoke <strong id="smoke-${room.room_id}"></strong></div>
        </div>
        <canvas id="chart-climate-${room.room_id}" width="420" height="130"></canvas>
        <canvas id="chart-lux-${room.room_id}" width="420" height="110"></canvas>
        <div class="devices">
          ${room.devices.map(deviceControlHtml).join("")}
        </div>
      </section>`,
    )
    .join("");
  app.innerHTML = `
    <div id="alarm-banner" class="alarm hidden">SMOKE DETECTED — buzzers sounding</div>
    <header>
      <h1>smarthome</h1>
      <span id="sim-clock"></span>
      <span id="stale-badge" class="pill warn hidden">stale data</span>
      <span class="grow"></span>
      <button id="export-btn">Export CSV</button>
      <button id="logout-btn">Log out</button>
    </header>
    <main>
      <div class="rooms">${rooms}</div>
      <aside>
        <section>
          <h2>Energy</h2>
          <div class="readings">
            <div>Total <strong id="energy-kwh"></strong> kWh</div>
            <div>Cost £<strong id="energy-cost"></strong></div>
          </div>
          <canvas id="chart-energy" width="300" height="130"></canvas>
        </section>
        <section>
          <h2>Thresholds</h2>
          <form id="thresholds-form">
            ${THRESHOLD_FIELDS.map(
              (field) => `
              <label>${field}
                <input name="${field}" id="thr-${field}" type="number" step="any" required>
                <span class="error" id="thr-error-${field}"></span>
              </label>`,
            ).join("")}
            <button type="submit">Save</button>
            <span id="thr-status"></span>
          </form>
        </section>
      </aside>
    </main>`;

  el("logout-btn").addEventListener("click", async () => {
    try {
      await client.logout();
    } finally {
      showLogin("logged out");
    }
  });
  el("export-btn").addEventListener("click", () => void downloadCsv());
  el<HTMLFormElement>("thresholds-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void saveThresholds();
  });
  for (const room of snapshot.rooms) {
    for (const device of room.devices) {
      bindDeviceControls(device.device_id);
    }
  }
  updateWidgets();
}

function deviceControlHtml(device: { device_id: string; kind: string }): string {
  const modes: Mode[] = ["AUTO", "MANUAL", "ON", "OFF"];
  const slider =
    device.kind === "buzzer"
      ? ""
      : `<input type="range" min="0" max="100" id="duty-${device.device_id}" disabled>
         <span class="duty-readout" id="duty-value-${device.device_id}"></span>`;
  return `
    <div class="device" id="device-${device.device_id}">
      <span class="device-name">${device.device_id}</span>
      <span class="pill" id="applied-${device.device_id}"></span>
      <select id="mode-${device.device_id}">
        ${modes.map((mode) => `<option value="${mode}">${mode}</option>`).join("")}
      </select>
      ${slider}
      <span class="error" id="device-error-${device.device_id}"></span>
    </div>`;
}

function bindDeviceControls(deviceId: string): void {
  const select = el<HTMLSelectElement>(`mode-${deviceId}`);
  select.addEventListener("change", async () => {
    const errorBox = el(`device-error-${deviceId}`);
    errorBox.textContent = "";
    try {
      const echo = await client.setMode(deviceId, select.value as Mode);
      model.acknowledgeMode(echo.device_id, echo.mode);
    } catch (error) {
      errorBox.textContent = error instanceof ApiError ? error.detail : String(error);
      if (error instanceof ApiError && error.status === 401) showLogin("session expired");
    }
    updateWidgets(); // revert or confirm from acknowledged state only
  });

  const slider = document.getElementById(`duty-${deviceId}`) as HTMLInputElement | null;
  if (slider) {
    slider.addEventListener("change", async () => {
      const errorBox = el(`device-error-${deviceId}`);
      errorBox.textContent = "";
      try {
        const echo = await client.setDuty(deviceId, Number(slider.value));
        model.acknowledgeDuty(echo.device_id, echo.duty_pct);
      } catch (error) {
        errorBox.textContent = error instanceof ApiError ? error.detail : String(error);
      }
      updateWidgets();
    });
  }
}

// ---- per-poll updates ----

async function poll(): Promise<void> {
  try {
    model.pushSnapshot(await client.status());
  } catch (error) {
    if (error instanceof ApiError && error.status === 401) {
      showLogin("session expired");
      return;
    }
    model.markStale();
  }
  updateWidgets();
}

function updateWidgets(): void {
  const snapshot = model.snapshot;
  if (!snapshot || !document.getElementById("sim-clock")) return;
  el("sim-clock").textContent = snapshot.timestamp;
  el("stale-badge").classList.toggle("hidden", !model.stale);
  el("alarm-banner").classList.toggle("hidden", !model.alarmActive());
  el("energy-kwh").textContent = snapshot.energy.cumulative_kwh.toFixed(3);
  el("energy-cost").textContent = snapshot.energy.cumulative_cost_gbp.toFixed(3);
  drawChart(el<HTMLCanvasElement>("chart-energy"), [{ label: "kWh", points: model.energySeries }], "kWh");

  for (const room of snapshot.rooms) {
    el(`temp-${room.room_id}`).textContent = room.temp_c.toFixed(1);
    el(`humidity-${room.room_id}`).textContent = room.humidity_pct.toFixed(1);
    el(`lux-${room.room_id}`).textContent = room.lux.toFixed(0);
    el(`motion-${room.room_id}`).textContent = room.motion ? "yes" : "no";
    el(`smoke-${room.room_id}`).textContent =
      room.smoke === null ? "n/a" : room.smoke ? "SMOKE" : "clear";
    const occupancy = el(`occupancy-${room.room_id}`);
    occupancy.textContent = room.occupancy_effective ? "occupied" : "vacant";
    occupancy.className = `pill ${room.occupancy_effective ? "ok" : ""}`;

    const series = model.roomSeries.get(room.room_id);
    if (series) {
      drawChart(
        el<HTMLCanvasElement>(`chart-climate-${room.room_id}`),
        [
          { label: "°C", points: series.temp },
          { label: "%RH", points: series.humidity },
        ],
        "°C / %RH",
      );
      drawChart(el<HTMLCanvasElement>(`chart-lux-${room.room_id}`), [{ label: "lx", points: series.lux }], "lx");
    }

    for (const device of room.devices) {
      el(`applied-${device.device_id}`).textContent = `${device.applied_duty_pct}%`;
      const select = el<HTMLSelectElement>(`mode-${device.device_id}`);
      if (document.activeElement !== select) select.value = device.mode;
      const slider = document.getElementById(`duty-${device.device_id}`) as HTMLInputElement | null;
      if (slider) {
        slider.disabled = !model.sliderEnabled(device.device_id);
        if (document.activeElement !== slider) slider.value = String(device.manual_duty_pct);
        el(`duty-value-${device.device_id}`).textContent = slider.disabled
          ? ""
          : `${device.manual_duty_pct}%`;
      }
    }
  }
}

// ---- thresholds ----

function fillThresholdForm(thresholds: Thresholds): void {
  for (const field of THRESHOLD_FIELDS) {
    el<HTMLInputElement>(`thr-${field}`).value = String(thresholds[field]);
  }
}

function readThresholdForm(): Thresholds {
  const out = {} as Record<keyof Thresholds, number>;
  for (const field of THRESHOLD_FIELDS) {
    out[field] = Number(el<HTMLInputElement>(`thr-${field}`).value);
  }
  return out as Thresholds;
}

async function saveThresholds(): Promise<void> {
  const form = readThresholdForm();
  const errors = validateThresholds(form);
  for (const field of THRESHOLD_FIELDS) {
    el(`thr-error-${field}`).textContent = errors[field] ?? "";
  }
  const status = el("thr-status");
  if (Object.keys(errors).length > 0) {
    status.textContent = "not saved";
    return;
  }
  try {
    fillThresholdForm(await client.putThresholds(form));
    status.textContent = "saved";
  } catch (error) {
    status.textContent = error instanceof ApiError ? error.detail : String(error);
  }
}

// ---- export ----

async function downloadCsv(): Promise<void> {
  try {
    const csv = await client.exportCsv();
    const url = URL.createObjectURL(new Blob([csv], { type: "text/csv" }));
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = "energy_log.csv";
    anchor.click();
    URL.revokeObjectURL(url);
  } catch (error) {
    alert(error instanceof ApiError ? error.detail : String(error));
  }
}

showLogin();
