// Explorer: state of any asset, its transaction chain with signer identities
// and metadata diffs between steps, and relation navigation in both
// directions (parents via relation values, children via the parent index).

import { StateWire } from "../api";
import { ExplorerView, explore } from "../controller";
import { JsonValue } from "../canonical";
import { AppContext } from "./app";
import { clear, el, errorBox, fmtTimestamp, shortId } from "./dom";

function kvTable(title: string, map: Record<string, JsonValue>): HTMLElement {
  const table = el("table", { class: "kv" }, el("caption", {}, title));
  for (const [key, value] of Object.entries(map)) {
    table.append(el("tr", {}, el("td", { class: "mono" }, key), el("td", { class: "mono" }, JSON.stringify(value))));
  }
  if (!Object.keys(map).length) {
    table.append(el("tr", {}, el("td", { class: "muted" }, "(empty)")));
  }
  return table;
}

export function explorerScreen(ctx: AppContext): HTMLElement {
  const root = el("section", { class: "screen explorer-screen" });
  const query = el("input", { name: "explore-query", placeholder: "asset id or search text" });
  const output = el("div", { class: "explorer-output" });

  function idLink(assetId: string, label?: string): HTMLElement {
    return el("a", { href: "#", class: "mono asset-link", onclick: (event) => {
      event.preventDefault();
      query.value = assetId;
      void run();
    } }, label ?? shortId(assetId));
  }

  function stateCard(state: StateWire): HTMLElement {
    return el("div", { class: "state-card" },
      el("div", {}, idLink(state.asset_id), ` chain length ${state.chain_length}`),
      kvTable("data", state.data),
      kvTable("metadata", state.metadata),
    );
  }

  function renderView(view: ExplorerView): void {
    clear(output);
    if (view.kind === "empty") {
      output.append(el("p", { class: "muted empty-state" }, "nothing found"));
      return;
    }
    if (view.kind === "search") {
      output.append(el("h3", {}, `search results for "${view.query}"`));
      if (!view.results.length) {
        output.append(el("p", { class: "muted empty-state" }, "no matching states"));
      }
      for (const state of view.results) {
        output.append(stateCard(state));
      }
      return;
    }
    const state = view.state!;
    output.append(el("h3", {}, `${view.assetKind} asset ${shortId(state.asset_id)}`));
    if (view.contextName) {
      output.append(el("p", {}, `context: ${view.contextName}`));
    }
    output.append(stateCard(state));

    const chain = el("div", { class: "chain" }, el("h4", {}, `chain (${view.chain.length} transactions)`));
    for (const step of view.chain) {
      const description: string[] = [];
      if (step.diff) {
        if (step.diff.added.length) description.push(`+${step.diff.added.join(",+")}`);
        if (step.diff.removed.length) description.push(`-${step.diff.removed.join(",-")}`);
        if (step.diff.changed.length) description.push(`~${step.diff.changed.join(",~")}`);
      }
      chain.append(
        el("div", { class: "chain-step" },
          el("span", { class: "mono" }, shortId(step.record.transaction.id)),
          el("span", {}, ` ${fmtTimestamp(step.record.timestamp)} `),
          el("span", { class: "signer" }, `signed by ${step.signerName ?? shortId(step.signer)}`),
          el("span", { class: "diff" }, step.diff ? ` metadata: ${description.join(" ") || "(unchanged)"}` : " (create)"),
        ),
      );
    }
    output.append(chain);

    if (view.parents.length) {
      const parents = el("div", { class: "parents" }, el("h4", {}, "related parents"));
      for (const link of view.parents) {
        parents.append(el("div", {}, `${link.field}: `, idLink(link.assetId)));
      }
      output.append(parents);
    }
    if (view.children.length) {
      const children = el("div", { class: "children" }, el("h4", {}, "related transactions"));
      for (const child of view.children) {
        children.append(stateCard(child));
      }
      output.append(children);
    }
  }

  async function run(): Promise<void> {
    clear(output);
    try {
      renderView(await explore(ctx.api, query.value));
    } catch (err) {
      output.append(errorBox(String(err)));
    }
  }

  root.append(
    el("h2", {}, "Explorer"),
    el("div", { class: "row" }, query, el("button", { name: "explore-run", onclick: () => void run() }, "explore")),
    output,
  );
  return root;
}
