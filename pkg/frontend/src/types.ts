/**
 * Wire types mirroring the exploration API (see docs/api.md in the
 * backend repository). The filter object is the single source of truth
 * for the current selection and travels with every request.
 */

export interface FilterQuery {
  fulltext_terms?: string[];
  entity_ids?: number[];
  keyterms?: string[];
  time_range?: [string, string];
  metadata?: [string, string][];
  tags?: string[];
  lang?: string;
}

export interface Snippet {
  start: number;
  end: number;
  text: string;
  matches: [number, number][];
}

export interface SearchHit {
  unit_id: string;
  doc_id: string;
  seq: number;
  lang: string | null;
  match_count: number;
  tags: string[];
  snippets: Snippet[];
  metadata: Record<string, unknown>;
}

export interface SearchResult {
  total: number;
  page: number;
  page_size: number;
  hits: SearchHit[];
}

export interface GraphNode {
  id: number | string;
  label: string;
  type: string;
  weight: number;
}

export interface GraphEdge {
  source: number | string;
  target: number | string;
  weight: number;
}

export interface Graph {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface Bucket {
  label: string;
  count: number;
  id?: number;
  type?: string;
}

export interface Aggregation {
  field: string;
  buckets: Bucket[];
}

export interface AnnotationRecord {
  start: number;
  end: number;
  a_type: string;
  surface: string;
  norm: string;
  provenance: string;
  entity_id?: number;
}

export interface UnitDetail {
  unit_id: string;
  doc_id: string;
  seq: number;
  lang: string | null;
  text: string;
  annotations: AnnotationRecord[];
  tags: string[];
  keyterms: string[];
  metadata: Record<string, unknown>;
}

export interface CollectionMeta {
  collection_id: string;
  documents: number;
  units: number;
  annotations: number;
  entities: number;
  languages: string[];
  tags: string[];
  metadata_keys: string[];
  entity_types: string[];
}
