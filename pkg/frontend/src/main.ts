/**
 * Page wiring. All analysis logic lives in the pure modules (thresholds,
 * radar, csv, form); this file only moves data between them and the DOM.
 *
 * Static hosting model: thresholds.json and community.csv are fetched from
 * ./public/, form submissions grow the project list in memory, and the
 * updated CSV is offered as a download (no server writes).
 */

import { appendProject, parseCommunityCsv, serializeCommunityCsv } from "./csv.js";
import { assessForm } from "./form.js";
import { renderRadarSvg } from "./radar.js";
import { parseThresholds } from "./thresholds.js";
import {
  BUILTIN_PROJECTS,
  DashboardProject,
  METRIC_IDS,
  MetricId,
  NOT_ASSESSABLE,
  ThresholdTable,
} from "./types.js";

interface State {
  table: ThresholdTable;
  projects: DashboardProject[];
  snapshotDates: Record<string, string>;
  selected: Set<string>;
}

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function zoneClass(zone: string): string {
  return "zone-" + zone.toLowerCase().replace(/[^a-z]+/g, "-");
}

function renderRadar(state: State): void {
  const chosen = state.projects.filter((p) => state.selected.has(p.name));
  $("radar-host").innerHTML = renderRadarSvg(state.table, chosen);
  const picker = $("project-picker");
  picker.innerHTML = "";
  for (const project of state.projects) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = state.selected.has(project.name);
    box.addEventListener("change", () => {
      if (box.checked) state.selected.add(project.name);
      else state.selected.delete(project.name);
      renderRadar(state);
    });
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${project.name} (${project.source})`));
    picker.appendChild(label);
  }
}

function renderCommunityTable(state: State): void {
  const rows = state.projects
    .map((project) => {
      const cells = METRIC_IDS.map((metricId) => {
        const value = project.metrics[metricId];
        return `<td>${value === null ? "&mdash;" : value}</td>`;
      }).join("");
      return `<tr><td>${project.name}</td>${cells}<td>${project.source}</td></tr>`;
    })
    .join("");
  $("community-table-body").innerHTML = rows;
}

function refreshDownload(state: State): void {
  const blob = new Blob(
    [serializeCommunityCsv(state.projects, state.snapshotDates)],
    { type: "text/csv" },
  );
  const link = $<HTMLAnchorElement>("download-csv");
  if (link.href.startsWith("blob:")) URL.revokeObjectURL(link.href);
  link.href = URL.createObjectURL(blob);
}

function showWarnings(messages: string[]): void {
  const list = $("csv-warnings");
  list.innerHTML = "";
  for (const message of messages) {
    const item = document.createElement("li");
    item.textContent = message;
    list.appendChild(item);
  }
}

function formValues(): Record<MetricId, string> {
  const raw = {} as Record<MetricId, string>;
  for (const metricId of METRIC_IDS) {
    raw[metricId] = $<HTMLInputElement>(`field-${metricId}`).value;
  }
  return raw;
}

function renderBadges(state: State): void {
  const { badges, profile } = assessForm(state.table, formValues());
  for (const badge of badges) {
    const host = $(`badge-${badge.metricId}`);
    host.textContent = badge.error ? badge.error : badge.zone;
    host.className = "badge " + (badge.error || badge.zone === NOT_ASSESSABLE
      ? "zone-none"
      : zoneClass(badge.zone));
    host.title = badge.description;
  }
  $("profile-badge").textContent = `profile: ${profile}`;
}

function addFormProject(state: State): void {
  const nameInput = $<HTMLInputElement>("field-name");
  const name = nameInput.value.trim();
  if (!name) {
    nameInput.focus();
    return;
  }
  const { badges } = assessForm(state.table, formValues());
  if (badges.some((b) => b.error)) return;
  if (badges.every((b) => b.value === null)) return;
  const metrics = {} as DashboardProject["metrics"];
  for (const badge of badges) metrics[badge.metricId] = badge.value;
  const unique = state.projects.some((p) => p.name === name)
    ? `${name}#${state.projects.filter((p) => p.name.startsWith(name)).length + 1}`
    : name;
  state.projects = appendProject(state.projects, {
    name: unique,
    metrics,
    source: "form-input",
  });
  state.selected.add(unique);
  renderCommunityTable(state);
  renderRadar(state);
  refreshDownload(state);
}

function loadCsvText(state: State, text: string): void {
  const parsed = parseCommunityCsv(text);
  showWarnings(parsed.warnings);
  const builtinNames = new Set(BUILTIN_PROJECTS.map((p) => p.name));
  const incoming = parsed.projects.filter((p) => !builtinNames.has(p.name));
  state.projects = [
    ...BUILTIN_PROJECTS,
    ...incoming,
    ...state.projects.filter((p) => p.source === "form-input"),
  ];
  Object.assign(state.snapshotDates, parsed.snapshotDates);
  renderCommunityTable(state);
  renderRadar(state);
  refreshDownload(state);
}

async function boot(): Promise<void> {
  const thresholdsText = await (await fetch("./public/thresholds.json")).text();
  const state: State = {
    table: parseThresholds(thresholdsText),
    projects: [...BUILTIN_PROJECTS],
    snapshotDates: {},
    selected: new Set(BUILTIN_PROJECTS.map((p) => p.name)),
  };

  try {
    const csvText = await (await fetch("./public/community.csv")).text();
    loadCsvText(state, csvText);
  } catch {
    showWarnings(["community.csv not reachable; builtin baselines only"]);
  }

  for (const metricId of METRIC_IDS) {
    $<HTMLInputElement>(`field-${metricId}`).addEventListener("input", () =>
      renderBadges(state),
    );
  }
  $("add-project").addEventListener("click", () => addFormProject(state));
  $<HTMLInputElement>("csv-file").addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const reader = new FileReader();
    reader.onload = () => loadCsvText(state, String(reader.result ?? ""));
    reader.readAsText(file);
  });

  renderRadar(state);
  renderCommunityTable(state);
  renderBadges(state);
  refreshDownload(state);
}

boot().catch((error) => {
  document.body.insertAdjacentHTML(
    "afterbegin",
    `<p class="boot-error">failed to start: ${String(error)}</p>`,
  );
});
