#ifndef LSM_LSM_H
#define LSM_LSM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LSM_BUILDING_LIBRARY)
#    define LSM_API __declspec(dllexport)
#  else
#    define LSM_API __declspec(dllimport)
#  endif
#else
#  define LSM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsm_status {
  LSM_OK = 0,
  LSM_ERR_INVALID_ARGUMENT = 1,
  LSM_ERR_CONFIGURATION = 2,
  LSM_ERR_DOMAIN = 3,
  LSM_ERR_ALIASING = 4,
  LSM_ERR_COERCIVITY = 5,
  LSM_ERR_SOLVER = 6,
  LSM_ERR_SINGULARITY = 7,
  LSM_ERR_ACCURACY = 8,
  LSM_ERR_DIMENSION = 9,
  LSM_ERR_ESTIMATION = 10,
  LSM_ERR_IO = 11,
  LSM_ERR_PARSE = 12,
  LSM_ERR_INTERNAL = 99
} lsm_status;

/* Message of the last failed call on this thread ("" if none). */
LSM_API const char* lsm_last_error(void);
LSM_API const char* lsm_status_name(lsm_status status);
LSM_API const char* lsm_version(void);

typedef struct lsm_mesh lsm_mesh;
typedef struct lsm_scenario lsm_scenario;
typedef struct lsm_ndmap lsm_ndmap;
typedef struct lsm_relative_data lsm_relative_data;
typedef struct lsm_indicator_map lsm_indicator_map;
typedef struct lsm_mask lsm_mask;
typedef struct lsm_verify_report lsm_verify_report;

/* mesh */
LSM_API lsm_status lsm_mesh_build(double h_target, lsm_mesh** out);
LSM_API lsm_status lsm_mesh_load(const char* path, lsm_mesh** out);
LSM_API lsm_status lsm_mesh_save(const lsm_mesh* mesh, const char* path);
LSM_API lsm_status lsm_mesh_counts(const lsm_mesh* mesh, size_t* vertices, size_t* triangles, size_t* boundary);
LSM_API lsm_status lsm_mesh_h_target(const lsm_mesh* mesh, double* h_target);
LSM_API void lsm_mesh_free(lsm_mesh* mesh);

/* scenario (admittance field) */
LSM_API lsm_status lsm_scenario_parse(const char* json_text, lsm_scenario** out);
LSM_API lsm_status lsm_scenario_load(const char* path, lsm_scenario** out);
LSM_API lsm_status lsm_scenario_background(lsm_scenario** out);
LSM_API lsm_status lsm_scenario_component_count(const lsm_scenario* scenario, size_t* count);
LSM_API lsm_status lsm_scenario_contains(const lsm_scenario* scenario, double x, double y, int* inside);
/* Assumption checks on the triangle centroids of the mesh. */
LSM_API lsm_status lsm_scenario_check_coercivity(const lsm_scenario* scenario, const lsm_mesh* mesh, int* holds,
                                                 double* alpha, double* z_re, double* z_im);
LSM_API lsm_status lsm_scenario_check_absorption(const lsm_scenario* scenario, const lsm_mesh* mesh, int* holds,
                                                 double* beta, int* empty_region);
LSM_API void lsm_scenario_free(lsm_scenario* scenario);

/* Neumann-to-Dirichlet maps; modes n = -N..-1, 1..N */
LSM_API lsm_status lsm_ndmap_compute(const lsm_mesh* mesh, const lsm_scenario* scenario, int order, int threads,
                                     lsm_ndmap** out);
LSM_API lsm_status lsm_ndmap_background(const lsm_mesh* mesh, int order, int threads, lsm_ndmap** out);
LSM_API lsm_status lsm_ndmap_analytic_background(int order, lsm_ndmap** out);
LSM_API lsm_status lsm_ndmap_add_noise(const lsm_ndmap* map, double level, uint64_t seed, lsm_ndmap** out);
LSM_API lsm_status lsm_ndmap_load(const char* path, lsm_ndmap** out);
LSM_API lsm_status lsm_ndmap_save(const lsm_ndmap* map, const char* path);
LSM_API lsm_status lsm_ndmap_order(const lsm_ndmap* map, int* order);
LSM_API lsm_status lsm_ndmap_entry(const lsm_ndmap* map, int m, int n, double* re, double* im);
LSM_API lsm_status lsm_ndmap_reciprocity_defect(const lsm_ndmap* map, double* defect);
/* Owned by the map; valid until it is freed. */
LSM_API const char* lsm_ndmap_provenance(const lsm_ndmap* map);
LSM_API void lsm_ndmap_free(lsm_ndmap* map);

/* Lambda - Lambda0 and its weighted singular system */
LSM_API lsm_status lsm_relative_data_create(const lsm_ndmap* measured, const lsm_ndmap* background,
                                            lsm_relative_data** out);
/* Copies up to capacity singular values (descending); count receives the total. */
LSM_API lsm_status lsm_relative_data_singular_values(const lsm_relative_data* data, double* values, size_t capacity,
                                                     size_t* count);
LSM_API void lsm_relative_data_free(lsm_relative_data* data);

typedef enum lsm_directions {
  LSM_DIRECTIONS_MAX = 0,
  LSM_DIRECTIONS_MEAN = 1,
  LSM_DIRECTIONS_X = 2,
  LSM_DIRECTIONS_Y = 3
} lsm_directions;

typedef struct lsm_sweep_options {
  double spacing;
  double r_max;
  double epsilon;
  lsm_directions directions;
  int threads;
  /* density form solved too when density_nodes > 0 */
  int density_nodes;
  double density_radius;
} lsm_sweep_options;

LSM_API void lsm_sweep_options_default(lsm_sweep_options* options);

typedef struct lsm_indicator_point {
  double x;
  double y;
  double indicator;
  double alpha;
  int feasible;
  double density_indicator; /* NaN unless the density form ran */
} lsm_indicator_point;

LSM_API lsm_status lsm_indicator_map_compute(const lsm_relative_data* data, const lsm_mesh* mesh,
                                             const lsm_sweep_options* options, lsm_indicator_map** out);
LSM_API lsm_status lsm_indicator_map_size(const lsm_indicator_map* map, size_t* size);
LSM_API lsm_status lsm_indicator_map_feasible_count(const lsm_indicator_map* map, size_t* count);
LSM_API lsm_status lsm_indicator_map_point(const lsm_indicator_map* map, size_t index, lsm_indicator_point* out);
LSM_API lsm_status lsm_indicator_map_write_csv(const lsm_indicator_map* map, const char* path);
LSM_API lsm_status lsm_indicator_map_write_pgm(const lsm_indicator_map* map, const char* path);
LSM_API void lsm_indicator_map_free(lsm_indicator_map* map);

typedef enum lsm_rule_kind {
  LSM_RULE_MULTIPLIER = 0,
  LSM_RULE_QUANTILE = 1,
  LSM_RULE_ALPHA_MULTIPLIER = 2
} lsm_rule_kind;

typedef struct lsm_support_rule {
  lsm_rule_kind kind;
  double value;
} lsm_support_rule;

LSM_API void lsm_support_rule_default(lsm_support_rule* rule);
LSM_API lsm_status lsm_mask_estimate(const lsm_indicator_map* map, const lsm_support_rule* rule, lsm_mask** out);
LSM_API lsm_status lsm_mask_size(const lsm_mask* mask, size_t* size);
LSM_API lsm_status lsm_mask_count(const lsm_mask* mask, size_t* count);
LSM_API lsm_status lsm_mask_threshold(const lsm_mask* mask, double* threshold);
LSM_API lsm_status lsm_mask_inside(const lsm_mask* mask, size_t index, int* inside);
LSM_API lsm_status lsm_mask_write_csv(const lsm_mask* mask, const char* path);
LSM_API void lsm_mask_free(lsm_mask* mask);

/* oracle suite */
typedef struct lsm_check {
  const char* name;
  double achieved;
  double required;
  int passed;
  const char* detail; /* "" unless the check could not run */
} lsm_check;

LSM_API lsm_status lsm_verify_run(double h_target, int order, int threads, lsm_verify_report** out);
LSM_API lsm_status lsm_verify_report_count(const lsm_verify_report* report, size_t* count);
LSM_API lsm_status lsm_verify_report_check(const lsm_verify_report* report, size_t index, lsm_check* out);
LSM_API lsm_status lsm_verify_report_all_passed(const lsm_verify_report* report, int* passed);
LSM_API void lsm_verify_report_free(lsm_verify_report* report);

#ifdef __cplusplus
}
#endif

#endif
