// Payload shapes of the JSON API. The UI computes nothing itself: every
// number on screen is traceable to one of these fields.

export const FEATURE_FLAGS = [
  "advanced_parameters",
  "cloning",
  "exemplar_models",
  "lookup_eol",
  "simulation",
] as const;

export type FeatureFlag = (typeof FEATURE_FLAGS)[number];
export type FlagMap = Record<FeatureFlag, boolean>;

export interface GroupDoc {
  group_id: string;
  flags: FlagMap;
}

export interface PhaseDoc {
  name: string;
  start: string;
  end: string;
}

export interface ExperimentDoc {
  id: string;
  name: string;
  mode: "manual" | "random";
  seed: number;
  groups: GroupDoc[];
  phases: PhaseDoc[];
  status: "draft" | "active" | "closed";
  created_at: string;
  assignments: { participant: string; group_id: string; joined_at: string }[];
}

export interface CreateExperimentResponse {
  experiment: ExperimentDoc;
  links: string[];
}

export interface JoinResponse {
  token: string;
  experiment: string;
  group: string;
  participant: string;
  flags: FlagMap;
  welcome_doc: string | null;
  exit_doc: string | null;
}

export interface ComponentDoc {
  id: string;
  name: string;
  kind: "biotic" | "abiotic";
  params: Record<string, number>;
}

export interface RelationshipDoc {
  id: string;
  source: string;
  target: string;
  kind: "consumes" | "produces" | "destroys";
  rate: number;
}

export interface ModelDoc {
  id: string;
  name: string;
  owner: string;
  provenance: unknown;
  components: ComponentDoc[];
  relationships: RelationshipDoc[];
  created_at: string;
  updated_at: string;
}

export interface BatchDoc {
  batch: string;
  model: string;
  status: "pending" | "done" | "failed";
  runs: number;
  steps: number;
  seed: number;
  series?: Record<string, number[][]>;
  error?: string;
}

export interface AggregateDoc {
  target: string;
  bins: { lo: number; hi: number; count: number }[];
  peak: number;
  mean: number;
  summaries: number[];
}

export interface TraitRecordDoc {
  canonical_name: string;
  params: Record<string, number>;
  source: string;
  retrieved_at: string | null;
}

export interface GroupStatsDoc {
  learners: number;
  models: number;
  total_session_time_s: number;
  mean_session_time_s: number;
  frequency: Record<"N" | "S" | "P" | "C" | "R" | "E", number>;
}

export interface AnalyticsReport {
  groups: Record<string, GroupStatsDoc>;
  models: { id: string; complexity: number; variety: number }[];
  parameter_space: [string, string][];
  coverage: { group: string; phase: string; explored: [string, string][]; pct: number }[];
  focus: { group: string; phase: string; pct: number | null }[];
  patterns: Record<string, Record<"Observation" | "Construction" | "Exploration", number>>;
}

export interface ApiErrorBody {
  code:
    | "validation_error"
    | "feature_disabled"
    | "not_found"
    | "unauthorized"
    | "conflict"
    | "no_data";
  message: string;
  detail: Record<string, unknown>;
}

export const BASIC_PARAMETERS = [
  "lifespan",
  "body_mass",
  "starting_population",
  "offspring_count",
  "reproductive_maturity",
  "reproductive_interval",
  "minimum_population",
] as const;

export const ADVANCED_PARAMETERS = [
  "photosynthesis_rate",
  "assimilation_efficiency",
  "move_velocity",
  "respiratory_rate",
  "move_direction",
  "carbon_biomass",
] as const;

export const ABIOTIC_PARAMETERS = ["amount", "minimum_amount", "growth_rate"] as const;
