/**
 * Column lists for every CSV the simulator emits, plus strict validation.
 *
 * The lists mirror docs/csv_schemas.md at the repository root; a test keeps
 * the two in sync so the simulator and the plots cannot drift silently.
 */

export const CSV_COLUMNS: Record<string, string[]> = {
  'aggregation_log.csv': ['t', 'kind', 'participants', 'pre_mean_cka', 'post_mean_cka'],
  'cdf.csv': ['latency_s', 'percentile'],
  'cdf_comparison.csv': ['percentile', 'latency_s', 'baseline_latency_s'],
  'cka.csv': ['agent_i', 'agent_j', 'value'],
  'drops.csv': ['packet_id', 'node', 't'],
  'epsilon.csv': ['t', 'epsilon'],
  'heatmap.csv': ['node_a', 'node_b', 'packets'],
  'latency.csv': ['packet_id', 'src', 'dst', 'created_t', 'delivered_t', 'e2e_s', 'hops'],
  'nodes.csv': ['node_id', 'name', 'kind', 'lat_deg', 'lon_deg', 'plane', 'slot'],
  'rewards.csv': ['t', 'agent', 'reward', 'r_queue', 'r_distance', 'r_event'],
  'topology.csv': ['t', 'node_a', 'node_b', 'kind', 'distance_m', 'rate_bps'],
};

export class SchemaError extends Error {}

/** Compare a parsed header against a schema; the message names the offending column. */
export function checkHeader(schema: string, header: string[]): void {
  const want = CSV_COLUMNS[schema];
  if (!want) {
    throw new SchemaError(`unknown schema "${schema}"`);
  }
  const n = Math.min(want.length, header.length);
  for (let i = 0; i < n; i++) {
    if (header[i] !== want[i]) {
      throw new SchemaError(
        `${schema}: expected column "${want[i]}" at position ${i + 1}, found "${header[i]}"`,
      );
    }
  }
  if (header.length < want.length) {
    throw new SchemaError(`${schema}: missing column "${want[header.length]}"`);
  }
  if (header.length > want.length) {
    throw new SchemaError(`${schema}: unexpected column "${header[want.length]}"`);
  }
}
