export { CSV_COLUMNS, checkHeader, SchemaError } from './schema';
export { parseCsv, readCsv, num, Table } from './csv';
export { render, PLOT_KINDS, KIND_SCHEMAS, OVERLAY_KINDS, PlotKind, Rendered } from './plots';
export { main } from './cli';
