#ifndef SECTOR_RELATIONS_H
#define SECTOR_RELATIONS_H

/* generated by cbindgen from sector-relations-ffi; do not edit */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_UTF8 = 2,
  SR_STATUS_INVALID_ARGUMENT = 3,
  SR_STATUS_IO = 4,
  SR_STATUS_FAILED = 5,
} SrStatus;

/**
 * Scoring engine selector for [`sr_extract_to_file`].
 */
typedef enum SrEngine {
  SR_ENGINE_FIM = 0,
  SR_ENGINE_PEARSON = 1,
  SR_ENGINE_KENDALL = 2,
  SR_ENGINE_SPEARMAN = 3,
  SR_ENGINE_ALS = 4,
} SrEngine;

/**
 * Opaque transaction database handle.
 */
typedef struct SrDatabase SrDatabase;

/**
 * Corpus statistics of a loaded database.
 */
typedef struct SrStats {
  uint64_t n_companies;
  uint64_t n_sectors;
  double mean_sectors_per_company;
  double sd_sectors_per_company;
} SrStats;

/**
 * Extraction parameters. `min_support` of 0 selects the relative default
 * (0.0005 of the record count); the ALS fields are ignored by the other
 * engines.
 */
typedef struct SrExtractOptions {
  enum SrEngine engine;
  uint64_t k;
  uint64_t min_support;
  uint64_t latent_dim;
  double lambda;
  uint64_t iterations;
  uint64_t seed;
} SrExtractOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread. Valid until the next
 * failing call; never NULL.
 */
const char *sr_last_error_message(void);

/**
 * Loads a transaction database from a delimited records file in the
 * default layout (`company_id,"sector,ids",names`).
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the database and must be released with
 * [`sr_database_free`].
 */
enum SrStatus sr_database_load(const char *path, struct SrDatabase **out);

/**
 * Releases a database handle. NULL is a no-op.
 *
 * # Safety
 * `db` must be NULL or a pointer returned by [`sr_database_load`] that has
 * not been freed yet.
 */
void sr_database_free(struct SrDatabase *db);

/**
 * Number of companies, or 0 for NULL.
 *
 * # Safety
 * `db` must be NULL or a live database handle.
 */
uint64_t sr_database_num_companies(const struct SrDatabase *db);

/**
 * Number of sectors, or 0 for NULL.
 *
 * # Safety
 * `db` must be NULL or a live database handle.
 */
uint64_t sr_database_num_sectors(const struct SrDatabase *db);

/**
 * Fills `out` with corpus statistics (population standard deviation).
 *
 * # Safety
 * `db` must be a live database handle; `out` must be a valid pointer.
 */
enum SrStatus sr_database_stats(const struct SrDatabase *db, struct SrStats *out);

/**
 * Mines frequent itemsets and writes the itemset and pair-support files.
 * Either output path may be NULL to skip that artifact.
 *
 * # Safety
 * `db` must be a live database handle; non-NULL paths must be valid
 * NUL-terminated strings.
 */
enum SrStatus sr_mine_to_files(const struct SrDatabase *db,
                               uint64_t min_support,
                               const char *itemsets_path,
                               const char *pairs_path);

/**
 * Default extraction options: FIM engine, K = 10, relative min support,
 * ALS defaults (l = 32, lambda = 0.1, 15 iterations, seed 42).
 */
struct SrExtractOptions sr_extract_options_default(void);

/**
 * Extracts the directed top-K relation set and writes it in the
 * four-column ranked format.
 *
 * # Safety
 * `db` must be a live database handle; `options` and `relations_path` must
 * be valid pointers.
 */
enum SrStatus sr_extract_to_file(const struct SrDatabase *db,
                                 const struct SrExtractOptions *options,
                                 const char *relations_path);

/**
 * Generates a planted-block synthetic corpus, writing the dataset and its
 * complete ground-truth label file.
 *
 * # Safety
 * `dataset_path` and `labels_path` must be valid NUL-terminated strings.
 */
enum SrStatus sr_synthesize(uint64_t blocks,
                            uint64_t sectors_per_block,
                            uint64_t companies,
                            uint64_t min_sectors,
                            uint64_t max_sectors,
                            double noise,
                            uint64_t seed,
                            const char *dataset_path,
                            const char *labels_path);

/**
 * Scores ranked relation files against a label file and writes the report
 * table plus, when `long_path` is non-NULL, the plot-ready long table.
 *
 * # Safety
 * `model_names` and `model_paths` must point to `n_models` valid strings;
 * `ks` must point to `n_ks` values; the path arguments must be valid
 * NUL-terminated strings (`long_path` may be NULL).
 */
enum SrStatus sr_evaluate_files(const char *const *model_names,
                                const char *const *model_paths,
                                uintptr_t n_models,
                                const char *labels_path,
                                const uint64_t *ks,
                                uintptr_t n_ks,
                                const char *report_path,
                                const char *long_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SECTOR_RELATIONS_H */
