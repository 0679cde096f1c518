export const METRIC_IDS = [
  "churn",
  "net_accumulation",
  "cleanup_ratio",
  "density",
  "norm_lifespan",
] as const;

export type MetricId = (typeof METRIC_IDS)[number];

export const METRIC_LABELS: Record<MetricId, string> = {
  churn: "Churn rate (events/month)",
  net_accumulation: "Net accumulation (toggles/month)",
  cleanup_ratio: "Cleanup ratio",
  density: "Toggle density (per kLoC)",
  norm_lifespan: "Normalized lifespan (cycles)",
};

/** One zone row of the thresholds.json artifact produced by the CLI. */
export interface ZoneDef {
  zone: string;
  min: number | null; // inclusive; null = unbounded below
  max: number | null; // exclusive; null = unbounded above
  description: string;
}

export type ThresholdTable = Record<MetricId, ZoneDef[]>;

export type MetricValues = Record<MetricId, number | null>;

export type ProjectSource = "builtin" | "community-csv" | "form-input";

export interface DashboardProject {
  name: string;
  metrics: MetricValues;
  source: ProjectSource;
}

export const NOT_ASSESSABLE = "not assessable";

export const BUILTIN_PROJECTS: DashboardProject[] = [
  {
    name: "kubernetes",
    source: "builtin",
    metrics: {
      churn: 10.2,
      net_accumulation: 1.5,
      cleanup_ratio: 0.74,
      density: 0.016,
      norm_lifespan: 6.1,
    },
  },
  {
    name: "gitlab",
    source: "builtin",
    metrics: {
      churn: 104.5,
      net_accumulation: 6.5,
      cleanup_ratio: 0.88,
      density: 0.081,
      norm_lifespan: 6.2,
    },
  },
];
