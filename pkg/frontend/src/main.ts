/**
 * Browser entry point: wires the session, delta landscape, trajectory table
 * and cluster browser onto the static page in index.html.
 */

import { ApiError, ServiceClient } from './api';
import { clusterPanels } from './clusters';
import { deltaLandscape } from './landscape';
import { ConstraintViolation, ExplorerSession } from './session';
import type { SessionView } from './session';

const $ = <T extends HTMLElement = HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element: ${sel}`);
  return el;
};

function notice(text: string, isError = false): void {
  const box = $('#notice');
  box.textContent = text;
  box.className = isError ? 'notice error' : 'notice';
}

function renderGauge(view: SessionView): void {
  $('#prob-value').textContent = view.probText;
  const fill = $('#gauge-fill');
  fill.style.width = `${(view.prob * 100).toFixed(1)}%`;
  fill.classList.toggle('crossed', view.crossedThreshold);
  $('#status-line').textContent = view.crossedThreshold
    ? 'counterfactual reached: the predicted class flips at this profile'
    : `plausibility ${view.plausibility.toPrecision(4)}`;
}

function renderTrajectory(view: SessionView, names: string[]): void {
  const table = $('#trajectory');
  const head = `<tr>${names.map((n) => `<th>${n}</th>`).join('')}<th>prob</th></tr>`;
  const body = view.trajectory
    .map(
      (row) =>
        `<tr>${row.cells
          .map((c, i) => `<td class="${row.changed[i] ? 'changed' : ''}">${c}</td>`)
          .join('')}<td>${row.probText}</td></tr>`,
    )
    .join('');
  table.innerHTML = head + body;
}

async function start(): Promise<void> {
  const baseUrl = ($('#base-url') as HTMLInputElement).value || 'http://127.0.0.1:8321';
  const client = new ServiceClient(baseUrl);
  const schema = await client.schema();
  const names = schema.variables.map((v) => v.name);
  const session = new ExplorerSession(client, schema);

  const update = (view: SessionView): void => {
    renderGauge(view);
    renderTrajectory(view, names);
  };

  const renderLandscape = async (id: string): Promise<void> => {
    const row = await client.kbRow(id);
    const groups = deltaLandscape(row, schema);
    $('#landscape').innerHTML = groups
      .map(
        (g) =>
          `<div class="group ${g.disabled ? 'disabled' : ''}" data-variable="${g.variable}">
             <h4>${g.variable}</h4>
             ${g.bars
               .map(
                 (b) =>
                   `<button class="bar ${b.factual ? 'factual' : ''}" ${g.disabled ? 'disabled' : ''}
                            data-variable="${g.variable}" data-cell="${b.cell}"
                            title="delta ${b.delta.toPrecision(4)}">${b.label}</button>`,
               )
               .join('')}
           </div>`,
      )
      .join('');
  };

  $('#load').addEventListener('click', async () => {
    const id = ($('#row-id') as HTMLInputElement).value;
    try {
      update(await session.loadIndividual(id));
      await renderLandscape(id);
      notice(`loaded ${id}`);
    } catch (err) {
      notice(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err), true);
    }
  });

  $('#landscape').addEventListener('click', async (ev) => {
    const target = ev.target as HTMLElement;
    const variable = target.dataset['variable'];
    const cell = target.dataset['cell'];
    if (!variable || cell === undefined) return;
    try {
      update(await session.applyStep(variable, Number(cell)));
      notice('');
    } catch (err) {
      if (err instanceof ConstraintViolation) notice(`blocked by ${err.constraint}: ${err.message}`, true);
      else notice(String(err), true);
    }
  });

  $('#auto-cf').addEventListener('click', async () => {
    try {
      const { response, view } = await session.autoExplain('counterfactual');
      update(view);
      notice(
        response.status === 'no_change_possible'
          ? 'no admissible action under the current constraints'
          : `auto trajectory: ${response.status} in ${response.steps.length} step(s)`,
      );
    } catch (err) {
      notice(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err), true);
    }
  });

  $('#auto-prev').addEventListener('click', async () => {
    const { response, view } = await session.autoExplain('preventive', 2);
    update(view);
    notice(`preventive steps: ${response.steps.map((s) => s.delta.toPrecision(3)).join(', ')}`);
  });

  $('#show-clusters').addEventListener('click', async () => {
    try {
      const panels = clusterPanels(await client.clusters());
      $('#clusters').innerHTML = panels
        .map(
          (p) =>
            `<div class="panel"><h4>${p.title}</h4>
             <p>size ${p.sizePercent} · positive ${p.positivePercent}</p>
             ${p.bars.map((b) => `<span class="cbar" title="${b.value}">${b.label}</span>`).join('')}
             </div>`,
        )
        .join('');
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        $('#clusters').textContent = 'no cluster profiles loaded — run the cluster command and restart the service with --clusters';
      } else {
        notice(String(err), true);
      }
    }
  });
}

document.addEventListener('DOMContentLoaded', () => {
  $('#connect').addEventListener('click', () => {
    start().catch((err) => notice(`cannot reach service: ${err}`, true));
  });
});
