// Context authoring: dynamic field rows mirroring the ledger's spec rules,
// a permissions picker over registered users, and the list of live contexts.

import { ApiError } from "../api";
import { FormValidationError, authorContext } from "../controller";
import { ContextForm, FieldSpecForm, VALUE_TYPES } from "../model";
import { AppContext } from "./app";
import { clear, el, errorBox, shortId } from "./dom";

function fieldRow(onRemove: (row: HTMLElement) => void): HTMLElement {
  const typeOptions = ["", ...VALUE_TYPES].map((t) => el("option", { value: t }, t || "type…"));
  const contentOptions = ["", ...VALUE_TYPES.filter((t) => t !== "array")].map((t) =>
    el("option", { value: t }, t || "content…"),
  );
  const row = el(
    "div",
    { class: "field-row" },
    el("select", { name: "field-section" }, el("option", { value: "data" }, "data"), el("option", { value: "metadata" }, "metadata")),
    el("input", { name: "field-key", placeholder: "key" }),
    el("select", { name: "field-type" }, ...typeOptions),
    el("select", { name: "field-content" }, ...contentOptions),
    el("input", { name: "field-parent", placeholder: "parent context id (relations)" }),
    el("label", {}, el("input", { name: "field-searchable", type: "checkbox" }), "searchable"),
    el("label", {}, el("input", { name: "field-required", type: "checkbox", checked: true }), "required"),
    el("button", { name: "field-remove", type: "button", onclick: (event) => {
      event.preventDefault();
      onRemove(row);
    } }, "×"),
  );
  return row;
}

function readFieldRow(row: HTMLElement): FieldSpecForm {
  const value = (name: string) => (row.querySelector(`[name=${name}]`) as HTMLInputElement | HTMLSelectElement).value;
  const checked = (name: string) => (row.querySelector(`[name=${name}]`) as HTMLInputElement).checked;
  return {
    section: value("field-section") as "data" | "metadata",
    key: value("field-key").trim(),
    type: value("field-type") as FieldSpecForm["type"],
    content: (value("field-content") || undefined) as FieldSpecForm["content"],
    parent: value("field-parent").trim() || undefined,
    searchable: checked("field-searchable"),
    required: checked("field-required"),
  };
}

export function contextsScreen(ctx: AppContext): HTMLElement {
  const root = el("section", { class: "screen contexts-screen" });
  const listing = el("div", { class: "context-list" });
  const feedback = el("div", { class: "feedback" });
  const fields = el("div", { class: "fields" });
  const permissions = el("select", { name: "context-permissions", multiple: true, size: "4" });
  const nameInput = el("input", { name: "context-name", placeholder: "context name" });
  const descriptionInput = el("input", { name: "context-description", placeholder: "description (optional)" });

  async function refresh(): Promise<void> {
    clear(listing);
    clear(permissions);
    try {
      const states = await ctx.api.contextStates();
      const table = el("table", { class: "contexts" });
      table.append(el("tr", {}, el("th", {}, "name"), el("th", {}, "version"), el("th", {}, "id"), el("th", {}, "chain")));
      for (const state of states) {
        const version = (state.data["version"] as { major?: number; minor?: number } | undefined) ?? {};
        table.append(
          el("tr", { class: "context-row" },
            el("td", {}, String(state.metadata["name"] ?? "")),
            el("td", {}, `${version.major ?? 1}.${version.minor ?? 0}`),
            el("td", { class: "mono" }, shortId(state.asset_id)),
            el("td", {}, String(state.chain_length))),
        );
      }
      listing.append(table);
      for (const user of await ctx.api.userStates()) {
        const key = String(user.data["public_key"] ?? "");
        permissions.append(el("option", { value: key }, `${user.data["username"]} (${shortId(key)})`));
      }
    } catch (err) {
      listing.append(errorBox(String(err)));
    }
  }

  const addFieldButton = el("button", { name: "add-field", type: "button", onclick: (event) => {
    event.preventDefault();
    fields.append(fieldRow((row) => row.remove()));
  } }, "add field");

  const submit = el("button", { name: "context-submit", onclick: async (event) => {
    event.preventDefault();
    clear(feedback);
    if (!ctx.wallet) {
      feedback.append(errorBox("unlock a wallet first"));
      return;
    }
    const form: ContextForm = {
      name: nameInput.value.trim(),
      description: descriptionInput.value.trim() || undefined,
      permissions: [...permissions.selectedOptions].map((o) => o.value),
      fields: [...fields.querySelectorAll<HTMLElement>(".field-row")].map(readFieldRow),
    };
    try {
      const result = await authorContext(ctx.api, ctx.wallet, form);
      feedback.append(el("div", { class: "ok" }, `context committed: ${result.id}`));
      await refresh();
    } catch (err) {
      if (err instanceof FormValidationError) {
        feedback.append(errorBox(`form: ${err.problems.join("; ")}`));
      } else if (err instanceof ApiError) {
        feedback.append(errorBox(`${err.stage}: ${err.detail}`));
      } else {
        feedback.append(errorBox(String(err)));
      }
    }
  } }, "author context");

  root.append(
    el("h2", {}, "Contexts"),
    listing,
    el("h3", {}, "Author a context"),
    el("div", { class: "row" }, nameInput, descriptionInput),
    el("div", { class: "row" }, el("label", {}, "permissions "), permissions),
    fields,
    el("div", { class: "row" }, addFieldButton, submit),
    feedback,
  );
  void refresh();
  return root;
}
