import * as fs from 'fs';
import Papa from 'papaparse';

import { checkHeader, SchemaError } from './schema';

export interface Table {
  schema: string;
  columns: string[];
  rows: Record<string, string>[];
}

/** Parse CSV text and validate its header against the named schema. */
export function parseCsv(text: string, schema: string): Table {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${schema}: ${parsed.errors[0].message}`);
  }
  const data = parsed.data;
  if (data.length === 0) {
    throw new SchemaError(`${schema}: file has no header row`);
  }
  const header = data[0];
  checkHeader(schema, header);
  const rows = data.slice(1).map((cells) => {
    const row: Record<string, string> = {};
    header.forEach((col, i) => {
      row[col] = cells[i] ?? '';
    });
    return row;
  });
  return { schema, columns: header, rows };
}

export function readCsv(path: string, schema: string): Table {
  return parseCsv(fs.readFileSync(path, 'utf8'), schema);
}

export function num(row: Record<string, string>, col: string): number {
  return parseFloat(row[col]);
}
