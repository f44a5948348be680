#ifndef SICLUSTER_H
#define SICLUSTER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SIC_STATUS_OK = 0,
  SIC_STATUS_NULL_POINTER = 1,
  SIC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A backend or memory cap was exceeded.
   */
  SIC_STATUS_RESOURCE_LIMIT = 3,
  SIC_STATUS_SIMULATION_FAILED = 4,
  SIC_STATUS_BUFFER_TOO_SMALL = 5,
  SIC_STATUS_PANIC = 6,
} SicStatus;

typedef enum {
  SIC_PROTOCOL_STANDARD = 0,
  SIC_PROTOCOL_SQUARE = 1,
} SicProtocol;

typedef enum {
  SIC_BACKEND_STABILIZER = 0,
  SIC_BACKEND_STATEVECTOR = 1,
} SicBackend;

/**
 * Result of a cluster-preparation run.
 */
typedef struct SicCluster SicCluster;

/**
 * Donor lattice with its dead sites.
 */
typedef struct SicLattice SicLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sic_version(void);

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *sic_last_error(void);

/**
 * Creates an `lx` by `ly` lattice. `dead` holds `n_dead` `(i, j)` pairs
 * (`2 * n_dead` values) and may be null when `n_dead` is 0.
 *
 * # Safety
 * `dead` must point to `2 * n_dead` readable values and `out` must be a
 * valid pointer to write to.
 */
SicStatus sic_lattice_new(size_t lx,
                          size_t ly,
                          const size_t *dead,
                          size_t n_dead,
                          SicLattice **out);

/**
 * # Safety
 * `lattice` must be null or a handle from `sic_lattice_new` not yet freed.
 */
void sic_lattice_free(SicLattice *lattice);

/**
 * # Safety
 * `lattice` must be a live handle and `out` writable.
 */
SicStatus sic_lattice_live_count(const SicLattice *lattice, size_t *out);

/**
 * Runs a preparation protocol on `lattice` with outcomes drawn from `seed`.
 *
 * # Safety
 * `lattice` must be a live handle and `out` writable.
 */
SicStatus sic_cluster_build(const SicLattice *lattice,
                            SicProtocol protocol,
                            SicBackend backend,
                            uint64_t seed,
                            SicCluster **out);

/**
 * # Safety
 * `cluster` must be null or a handle from `sic_cluster_build` not yet freed.
 */
void sic_cluster_free(SicCluster *cluster);

/**
 * Vertex count (one per lattice site, dead sites included).
 *
 * # Safety
 * `cluster` must be a live handle and `out` writable.
 */
SicStatus sic_cluster_vertex_count(const SicCluster *cluster, size_t *out);

/**
 * Copies the edges as `(a, b)` pairs with `a < b` into `buf`, which holds
 * `capacity` pairs. `n_edges` receives the edge count even when the buffer
 * is too small; `buf` may then be null.
 *
 * # Safety
 * `buf` must have room for `2 * capacity` values; `n_edges` must be writable.
 */
SicStatus sic_cluster_edges(const SicCluster *cluster,
                            size_t *buf,
                            size_t capacity,
                            size_t *n_edges);

/**
 * Whether the raw measured graph has exactly the predicted edge set.
 *
 * # Safety
 * `cluster` must be a live handle and `out` writable.
 */
SicStatus sic_cluster_matches_prediction(const SicCluster *cluster, bool *out);

/**
 * The corrected graph as JSON; free the result with `sic_string_free`.
 * Returns null on failure.
 *
 * # Safety
 * `cluster` must be a live handle.
 */
char *sic_cluster_to_json(const SicCluster *cluster);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sic_string_free(char *s);

/**
 * Fidelity of the composite controlled-phase `C(theta)` on the default
 * two-spin system. `rabi_hz` is the drive frequency in Hz; infinity or a
 * non-positive value selects instantaneous pulses.
 *
 * # Safety
 * `out` must be writable.
 */
SicStatus sic_composite_fidelity(double theta, double rabi_hz, double *out);

/**
 * Preparation time in seconds for `n` donors with default timing
 * parameters, sequential or parallel shuttling.
 *
 * # Safety
 * `out` must be writable.
 */
SicStatus sic_preparation_time(size_t n, bool parallel, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SICLUSTER_H */
