/* pairclass C API: ordered group classification from pairwise comparisons.
 *
 * All functions return a pc_status code; outputs come back through out
 * parameters. Handles are opaque and must be released with the matching
 * _free call. Strings returned through char** are heap-allocated and must be
 * released with pc_string_free. On error, pc_last_error() returns a
 * thread-local description of the most recent failure.
 */
#ifndef PAIRCLASS_H
#define PAIRCLASS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pc_status {
  PC_OK = 0,
  PC_ERR_INVALID = 1, /* bad arguments or unusable configuration */
  PC_ERR_DATA = 2,    /* schema, parse, duplicate-row, or validation failure */
  PC_ERR_NUMERIC = 3, /* insufficient data, degenerate support, failed computation */
  PC_ERR_IO = 4       /* file system failure */
} pc_status;

typedef enum pc_index_kind {
  PC_INDEX_CONDITIONAL_MEAN = 0,
  PC_INDEX_CDF_DOMINANCE = 1,
  PC_INDEX_PRESENCE_MEAN = 2
} pc_index_kind;

typedef enum pc_orientation {
  PC_ORIENT_VALUE = 0,      /* stochastically higher outcomes mean higher type */
  PC_ORIENT_PROCUREMENT = 1 /* survival-function form: lower outcomes mean higher type */
} pc_orientation;

typedef struct pc_panel pc_panel;
typedef struct pc_pvalues pc_pvalues;

typedef struct pc_test_options {
  pc_index_kind index;
  pc_orientation orientation;
  int draws;                 /* bootstrap draws B, >= 1 */
  int grid;                  /* quadrature nodes, >= 2 */
  double trim_lo, trim_hi;   /* pooled-quantile trim, 0 < lo < hi < 1 */
  double bandwidth_c;        /* kernel bandwidth rule constant */
  double bandwidth_exponent; /* kernel bandwidth rule exponent */
  int64_t threshold;         /* pair comparability threshold, >= 2 */
  uint64_t seed;
  int threads; /* <= 0 means machine parallelism */
} pc_test_options;

typedef struct pc_classify_options {
  int fixed_k; /* > 0 classifies into exactly K groups; 0 selects K */
  int k_max;   /* 0 means roster size */
  int markets; /* L, needed for the r_L / g_L rules */
} pc_classify_options;

typedef struct pc_confidence_options {
  pc_test_options test;
  int group_index; /* 1-based */
  double alpha;
  int draws; /* outer bootstrap draws B2 */
  uint64_t seed;
} pc_confidence_options;

typedef struct pc_simulate_options {
  const char* design; /* "S1".."S4", or NULL for a custom design */
  int n;              /* custom design: agents */
  int k0;             /* custom design: groups (agents split evenly) */
  int markets;
  double d_mu;
  double mu1;
  double sigma;
  int random_pairs; /* nonzero: two agents per market from two random groups */
  uint64_t seed;
} pc_simulate_options;

typedef struct pc_montecarlo_options {
  pc_simulate_options dgp;
  pc_test_options test;
  int replications;
  uint64_t seed;
  int threads;
} pc_montecarlo_options;

typedef struct pc_twostep_options {
  pc_simulate_options dgp; /* random_pairs is implied */
  pc_test_options test;
  int replications;
  uint64_t seed;
  int threads;
} pc_twostep_options;

/* Library version ("major.minor.patch"); storage is static. */
const char* pc_version(void);

/* Thread-local message for the most recent error; storage is static. */
const char* pc_last_error(void);

void pc_string_free(char* s);

/* Fills an options struct with the library defaults. */
void pc_test_options_defaults(pc_test_options* opts);

/* ---- panels ------------------------------------------------------------ */
pc_status pc_panel_load_csv(const char* path, pc_panel** out);
pc_status pc_panel_parse_csv(const char* csv_text, pc_panel** out);
pc_status pc_panel_to_csv(const pc_panel* panel, char** out);
int pc_panel_agent_count(const pc_panel* panel);
int pc_panel_market_count(const pc_panel* panel);
/* Returns the agent id at roster position `index` (owned by the panel). */
const char* pc_panel_agent_id(const pc_panel* panel, int index);
void pc_panel_free(pc_panel* panel);

/* ---- pairwise testing --------------------------------------------------- */
pc_status pc_pvalues_compute(const pc_panel* panel, const pc_test_options* opts,
                             pc_pvalues** out);
pc_status pc_pvalues_to_json(const pc_pvalues* pv, char** out);
pc_status pc_pvalues_parse_json(const char* json_text, pc_pvalues** out);
void pc_pvalues_free(pc_pvalues* pv);

/* ---- classification ----------------------------------------------------- */
pc_status pc_classify(const pc_pvalues* pv, const pc_classify_options* opts, char** json_out);

/* ---- identification diagnostics ------------------------------------------ */
pc_status pc_identify(const char* graph_json, const char* tau_json, int k0, char** json_out);

/* ---- confidence sets ------------------------------------------------------ */
pc_status pc_confidence(const pc_panel* panel, const pc_confidence_options* opts,
                        char** json_out);

/* ---- simulation ----------------------------------------------------------- */
/* true_groups_json_out (optional) receives the generated ordered partition. */
pc_status pc_simulate(const pc_simulate_options* opts, pc_panel** out,
                      char** true_groups_json_out);
pc_status pc_montecarlo(const pc_montecarlo_options* opts, char** csv_out);
pc_status pc_twostep(const pc_twostep_options* opts, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* PAIRCLASS_H */
