#!/usr/bin/env node
/**
 * plot <kind> --in a.csv [--in b.csv] --out fig.svg [--label name ...]
 *
 * Exit codes: 0 rendered (warnings go to stderr), 1 bad input data,
 * 2 usage error.
 */

import * as fs from 'fs';
import * as path from 'path';
import { parseArgs } from 'util';

import { readCsv, Table } from './csv';
import { KIND_SCHEMAS, OVERLAY_KINDS, PLOT_KINDS, PlotKind, render } from './plots';
import { SchemaError } from './schema';

const USAGE = `usage: plot <kind> --in a.csv [--in b.csv] --out fig.svg [--label name ...]
kinds: ${PLOT_KINDS.join(', ')}
topology takes two inputs: topology.csv then nodes.csv`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: 'string', multiple: true },
        out: { type: 'string' },
        label: { type: 'string', multiple: true },
      },
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  const kind = parsed.positionals[0] as PlotKind | undefined;
  const inputs = parsed.values.in ?? [];
  const out = parsed.values.out;
  const labels = parsed.values.label ?? [];

  if (!kind || !(PLOT_KINDS as string[]).includes(kind)) {
    console.error(`unknown plot kind "${kind ?? ''}"`);
    console.error(USAGE);
    return 2;
  }
  if (!out || inputs.length === 0) {
    console.error('need --out and at least one --in');
    console.error(USAGE);
    return 2;
  }
  const schemas = KIND_SCHEMAS[kind];
  if (OVERLAY_KINDS.has(kind)) {
    if (labels.length > inputs.length) {
      console.error('more --label values than --in files');
      return 2;
    }
  } else if (inputs.length !== schemas.length) {
    console.error(
      `${kind} takes exactly ${schemas.length} input file(s): ${schemas.join(', ')}`,
    );
    return 2;
  }

  const tables: Table[] = [];
  try {
    inputs.forEach((file, i) => {
      const schema = OVERLAY_KINDS.has(kind) ? schemas[0] : schemas[i];
      tables.push(readCsv(file, schema));
    });
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(err.message);
    } else {
      console.error(String(err instanceof Error ? err.message : err));
    }
    return 1;
  }

  const finalLabels = inputs.map(
    (file, i) => labels[i] ?? path.basename(file, path.extname(file)),
  );
  const { svg, warnings } = render(kind, tables, finalLabels);
  for (const w of warnings) {
    console.error(`warning: ${w}`);
  }
  fs.mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
  fs.writeFileSync(out, svg);
  return 0;
}

const invokedDirectly = typeof require !== 'undefined' && require.main === module;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
