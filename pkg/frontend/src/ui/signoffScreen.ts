// Quality sign-off: pick an order line, record checked properties with their
// results, sign client-side, submit; the auto-issued conformance certificate
// (if the release condition is met) appears under the order line.

import { ApiError, StateWire } from "../api";
import { CheckResult, FormValidationError, certificatesForOrderLine, signOffQualityCheck } from "../controller";
import { findContextByName } from "../model";
import { AppContext } from "./app";
import { clear, el, errorBox, shortId } from "./dom";

function checkRow(): HTMLElement {
  return el(
    "div",
    { class: "check-row" },
    el("input", { name: "check-property", placeholder: "property" }),
    el("input", { name: "check-value", placeholder: "observed value" }),
    el("select", { name: "check-status" }, el("option", { value: "pass" }, "pass"), el("option", { value: "fail" }, "fail")),
  );
}

export function signoffScreen(ctx: AppContext): HTMLElement {
  const root = el("section", { class: "screen signoff-screen" });
  const lines = el("select", { name: "order-line", size: "1" });
  const checkNo = el("input", { name: "check-no", placeholder: "check number (e.g. CHK-7)" });
  const checks = el("div", { class: "checks" }, checkRow());
  const feedback = el("div", { class: "feedback" });
  const related = el("div", { class: "related" });

  async function refreshLines(): Promise<void> {
    clear(lines);
    const context = await findContextByName(ctx.api, "order_lines");
    if (!context) {
      lines.append(el("option", { value: "" }, "no order_lines context yet"));
      return;
    }
    for (const state of await ctx.api.transactionStatesByContext(context.asset_id)) {
      const label = `line ${state.data["line_no"]} — ${state.data["material_code"] ?? shortId(state.asset_id)}`;
      lines.append(el("option", { value: state.asset_id }, label));
    }
  }

  async function refreshRelated(orderLineId: string): Promise<void> {
    clear(related);
    if (!orderLineId) return;
    const certificates = await certificatesForOrderLine(ctx.api, orderLineId);
    const header = el("h3", {}, "Certificates for this order line");
    related.append(header);
    if (!certificates.length) {
      related.append(el("p", { class: "muted" }, "none issued yet"));
      return;
    }
    for (const cert of certificates) {
      related.append(
        el("div", { class: "certificate" },
          el("span", { class: "mono" }, String(cert.data["certificate_no"] ?? shortId(cert.asset_id))),
          el("span", {}, ` released=${cert.metadata["released"]}`,
          ),
        ),
      );
    }
  }

  const addCheck = el("button", { name: "add-check", type: "button", onclick: (event) => {
    event.preventDefault();
    checks.append(checkRow());
  } }, "add property");

  const submit = el("button", { name: "signoff-submit", onclick: async (event) => {
    event.preventDefault();
    clear(feedback);
    if (!ctx.wallet) {
      feedback.append(errorBox("unlock a wallet first"));
      return;
    }
    const results: CheckResult[] = [...checks.querySelectorAll<HTMLElement>(".check-row")].map((row) => ({
      property: (row.querySelector("[name=check-property]") as HTMLInputElement).value.trim(),
      value: (row.querySelector("[name=check-value]") as HTMLInputElement).value.trim(),
      status: (row.querySelector("[name=check-status]") as HTMLSelectElement).value as "pass" | "fail",
    })).filter((r) => r.property);
    try {
      const result = await signOffQualityCheck(ctx.api, ctx.wallet, lines.value, checkNo.value.trim(), results);
      feedback.append(el("div", { class: "ok" }, `quality check committed: ${result.id}`));
      await refreshRelated(lines.value);
    } catch (err) {
      if (err instanceof FormValidationError) {
        feedback.append(errorBox(`form: ${err.problems.join("; ")}`));
      } else if (err instanceof ApiError) {
        feedback.append(errorBox(`${err.stage}: ${err.detail}`));
      } else {
        feedback.append(errorBox(String(err)));
      }
    }
  } }, "sign off");

  lines.addEventListener("change", () => void refreshRelated(lines.value));

  root.append(
    el("h2", {}, "Quality sign-off"),
    el("div", { class: "row" }, el("label", {}, "order line "), lines, checkNo),
    checks,
    el("div", { class: "row" }, addCheck, submit),
    feedback,
    related,
  );
  void refreshLines().then(() => refreshRelated(lines.value));
  return root;
}
