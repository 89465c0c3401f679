/** Client-side validation of patient data entry against the tree's field
 * dictionary. Raw inputs are strings (or checkbox booleans) from the form;
 * the result is either a wire-ready values object or per-field messages.
 * Validation failures never leave the client.
 */

import type { FieldDoc, PatientValue } from "./types.js";

export interface FormResult {
  values: Record<string, PatientValue>;
  errors: Record<string, string>;
  /** Count of fields that carried a value (valid or not). */
  entered: number;
}

export function validateForm(
  fields: Record<string, FieldDoc>,
  raw: Record<string, string | boolean>,
): FormResult {
  const values: Record<string, PatientValue> = {};
  const errors: Record<string, string> = {};
  let entered = 0;

  for (const [name, input] of Object.entries(raw)) {
    const field = fields[name];
    if (!field) {
      errors[name] = "unknown field";
      entered += 1;
      continue;
    }
    if (typeof input === "boolean") {
      entered += 1;
      if (field.type !== "boolean") {
        errors[name] = `${name} is not a yes/no field`;
      } else {
        values[name] = input;
      }
      continue;
    }
    const text = input.trim();
    if (text === "") continue; // untouched input
    entered += 1;
    switch (field.type) {
      case "number": {
        const parsed = Number(text);
        if (!Number.isFinite(parsed)) {
          errors[name] = `enter a number${field.unit ? ` in ${field.unit}` : ""}`;
        } else {
          values[name] = field.unit
            ? { value: parsed, unit: field.unit }
            : parsed;
        }
        break;
      }
      case "boolean": {
        if (text === "true" || text === "yes") values[name] = true;
        else if (text === "false" || text === "no") values[name] = false;
        else errors[name] = "enter yes or no";
        break;
      }
      case "enum": {
        const allowed = field.values ?? [];
        if (allowed.includes(text)) values[name] = text;
        else errors[name] = `one of: ${allowed.join(", ")}`;
        break;
      }
      case "string": {
        values[name] = text;
        break;
      }
      default:
        errors[name] = "unsupported field type";
    }
  }
  return { values, errors, entered };
}
