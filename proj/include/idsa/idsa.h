#ifndef IDSA_IDSA_H
#define IDSA_IDSA_H

/* C interface to the IDS approximation library.
 *
 * Every function returns an idsa_status. On failure the message of the most
 * recent error on the calling thread is available from idsa_last_error().
 * Handles are opaque and immutable once created; the same handle may be used
 * from several threads. Each *_create / *_make call is paired with the
 * matching *_free, which accepts NULL.
 *
 * Group elements are passed as rows of `rank` int64 coordinates (rank 1..4
 * for Z^d, 3 for H3 with (a, b, c) the Heisenberg coordinates). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IDSA_API __declspec(dllexport)
#elif defined(IDSA_BUILDING)
#define IDSA_API __attribute__((visibility("default")))
#else
#define IDSA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum idsa_status {
  IDSA_OK = 0,
  IDSA_ERR_INVALID_ARGUMENT = 1,
  IDSA_ERR_DOMAIN = 2,       /* e.g. shrunk volume is empty */
  IDSA_ERR_NUMERICAL = 3,    /* eigensolver failure */
  IDSA_ERR_PRECONDITION = 4, /* hypothesis of a bound is violated */
  IDSA_ERR_VALIDATION = 5,   /* rule or kernel failed a consistency check */
  IDSA_ERR_IO = 6,
  IDSA_ERR_BUFFER_TOO_SMALL = 7,
  IDSA_ERR_INTERNAL = 8
} idsa_status;

typedef struct idsa_group idsa_group;
typedef struct idsa_subset idsa_subset;
typedef struct idsa_colouring idsa_colouring;
typedef struct idsa_operator idsa_operator;
typedef struct idsa_freqs idsa_freqs;
typedef struct idsa_step idsa_step;

IDSA_API const char* idsa_version(void);
IDSA_API const char* idsa_last_error(void);
IDSA_API const char* idsa_status_name(idsa_status s);

/* ---- groups */
IDSA_API idsa_status idsa_group_create_zd(int d, idsa_group** out);
IDSA_API idsa_status idsa_group_create_h3(idsa_group** out);
IDSA_API void idsa_group_free(idsa_group* g);
IDSA_API idsa_status idsa_group_rank(const idsa_group* g, int* rank);
IDSA_API idsa_status idsa_group_word_length(const idsa_group* g, const int64_t* element, int64_t* length);
IDSA_API idsa_status idsa_group_ball_size(const idsa_group* g, int radius, size_t* size);
/* Generators in slot order, rank coordinates each; count may be NULL. */
IDSA_API idsa_status idsa_group_generators(const idsa_group* g, int64_t* coords, size_t capacity,
                                           size_t* count);

/* ---- finite subsets */
/* Default Folner set Q_n (cube on Z^d, box {a,b < n, c < n^2} on H3). */
IDSA_API idsa_status idsa_subset_folner(const idsa_group* g, int n, idsa_subset** out);
IDSA_API idsa_status idsa_subset_ball(const idsa_group* g, int radius, idsa_subset** out);
/* Coordinate box lo[i] <= x_i <= hi[i], arrays of length rank. */
IDSA_API idsa_status idsa_subset_box(const idsa_group* g, const int64_t* lo, const int64_t* hi,
                                     idsa_subset** out);
IDSA_API idsa_status idsa_subset_from_elements(const idsa_group* g, const int64_t* coords, size_t count,
                                               idsa_subset** out);
IDSA_API void idsa_subset_free(idsa_subset* s);
IDSA_API idsa_status idsa_subset_size(const idsa_subset* s, size_t* size);
/* Copies rank * size coordinates in the fixed element order. */
IDSA_API idsa_status idsa_subset_elements(const idsa_subset* s, int64_t* coords, size_t capacity);
IDSA_API idsa_status idsa_subset_diameter(const idsa_subset* s, int64_t* diameter);
/* kind: 0 = inner and outer, 1 = inner only, 2 = outer only. */
IDSA_API idsa_status idsa_subset_boundary_size(const idsa_subset* s, int radius, int kind, size_t* size);
/* |Q S \ Q| with right multiplication by the generators. */
IDSA_API idsa_status idsa_subset_right_generator_boundary(const idsa_subset* s, size_t* size);
IDSA_API idsa_status idsa_subset_shrink(const idsa_subset* s, int radius, idsa_subset** out);

/* ---- colourings */
IDSA_API idsa_status idsa_colouring_trivial(idsa_colouring** out);
/* Z only: white (0) on x >= 0 and multiples of 3, black (1) elsewhere. With
 * has_cutoff, every x <= cutoff is white as well. */
IDSA_API idsa_status idsa_colouring_half_line_mod3(int has_cutoff, int64_t cutoff, idsa_colouring** out);
IDSA_API idsa_status idsa_colouring_percolation(const char* const* symbols, const uint64_t* weights,
                                                size_t colours, uint64_t seed, idsa_colouring** out);
/* Colour of q gamma is tile_colours[index of q in Q_n]. */
IDSA_API idsa_status idsa_colouring_periodic(const idsa_group* g, int n, const char* const* symbols,
                                             size_t colours, const int* tile_colours, size_t count,
                                             idsa_colouring** out);
IDSA_API void idsa_colouring_free(idsa_colouring* c);
IDSA_API idsa_status idsa_colouring_alphabet_size(const idsa_colouring* c, size_t* size);
IDSA_API idsa_status idsa_colouring_at(const idsa_colouring* c, const idsa_group* g, const int64_t* element,
                                       int* colour);

/* ---- operators */
IDSA_API idsa_status idsa_operator_zero(const idsa_group* g, int k, int range, idsa_operator** out);
IDSA_API idsa_status idsa_operator_adjacency(const idsa_group* g, idsa_operator** out);
/* retained[c] != 0 keeps vertices of colour c. */
IDSA_API idsa_status idsa_operator_percolation(const idsa_group* g, const int* retained, size_t colours,
                                               double edge_weight, idsa_operator** out);
IDSA_API idsa_status idsa_operator_laplacian(const idsa_operator* base, idsa_operator** out);
/* table[(cx * colours + cy) * (|S| + 1) + slot], slots are the generators
 * followed by the identity. */
IDSA_API idsa_status idsa_operator_colour_table(const idsa_group* g, int colours, const double* table,
                                                size_t length, idsa_operator** out);
/* Offsets o_i (rows of rank coordinates) with k x k row-major blocks W_i;
 * block(x, y) = W for the offset y x^-1. */
IDSA_API idsa_status idsa_operator_periodic(const idsa_group* g, int k, const int64_t* offsets,
                                            const double* blocks, size_t count, idsa_operator** out);
IDSA_API void idsa_operator_free(idsa_operator* op);
IDSA_API idsa_status idsa_operator_info(const idsa_operator* op, int* k, int* range, int* invariance_radius);
/* c |B_R| over the blocks assembled so far. */
IDSA_API idsa_status idsa_operator_norm_bound(const idsa_operator* op, double* bound);

/* ---- frequency providers */
IDSA_API idsa_status idsa_freqs_trivial(idsa_freqs** out);
IDSA_API idsa_status idsa_freqs_percolation(const uint64_t* weights, size_t colours, idsa_freqs** out);
IDSA_API idsa_status idsa_freqs_empirical(const idsa_colouring* c, const idsa_subset* reference,
                                          idsa_freqs** out);
IDSA_API void idsa_freqs_free(idsa_freqs* f);
/* Frequency of the class of the pattern (domain, values). */
IDSA_API idsa_status idsa_freqs_pattern(const idsa_freqs* f, const idsa_subset* domain, const int* values,
                                        double* frequency);
/* Occurrences of the pattern in C restricted to U, divided by |U|. The exact
 * ratio is also returned as a decimal string "num/den" when text != NULL. */
IDSA_API idsa_status idsa_empirical_frequency(const idsa_colouring* c, const idsa_subset* domain,
                                              const int* values, const idsa_subset* u, double* frequency,
                                              char* text, size_t text_capacity);

/* ---- step functions */
IDSA_API void idsa_step_free(idsa_step* f);
IDSA_API idsa_status idsa_step_size(const idsa_step* f, size_t* breakpoints);
/* initial value, then breakpoints and values of length idsa_step_size. */
IDSA_API idsa_status idsa_step_data(const idsa_step* f, double* initial, double* breakpoints, double* values,
                                    size_t capacity);
IDSA_API idsa_status idsa_step_eval(const idsa_step* f, double x, double* value);
IDSA_API idsa_status idsa_step_sup_distance(const idsa_step* f, const idsa_step* g, double* distance);

/* ---- IDS computations */
typedef struct idsa_approximant_info {
  size_t volume;        /* |U_R|, or |U| without shrinking */
  double normalization; /* k |U_R| */
  double tau;
  int used_lanczos;     /* 1 when the sparse route produced the values */
} idsa_approximant_info;

/* n(H[U_R]) / (k |U_R|); tau <= 0 selects the default. */
IDSA_API idsa_status idsa_ids_approximant(const idsa_operator* op, const idsa_colouring* c,
                                          const idsa_subset* u, int shrink, double tau, idsa_step** out,
                                          idsa_approximant_info* info);

typedef struct idsa_certificate {
  double tile_term;
  double folner_term;
  double freq_term;
  double renorm_term;
  double total;
} idsa_certificate;

IDSA_API idsa_status idsa_ids_certificate(const idsa_operator* op, const idsa_colouring* c,
                                          const idsa_subset* u, const idsa_subset* tile,
                                          const idsa_freqs* freqs, idsa_certificate* out);

/* Frequency-weighted tile approximant. Classes come from the empirical
 * provider's reference volume, or from `fallback` for analytic providers. */
IDSA_API idsa_status idsa_frequency_side(const idsa_operator* op, const idsa_colouring* c,
                                         const idsa_subset* tile, const idsa_freqs* freqs,
                                         const idsa_subset* fallback, double tau, idsa_step** out,
                                         double* bound);

typedef struct idsa_delta {
  double b_term;
  double folner_term;
  double freq_term;
  double total;
  double measured;
} idsa_delta;

IDSA_API idsa_status idsa_ids_delta(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* u,
                                    const idsa_subset* tile, const idsa_freqs* freqs,
                                    const idsa_subset* fallback, double tau, idsa_delta* out);

typedef struct idsa_continuity {
  double gap;
  double bound;
  double max_entry_difference;
} idsa_continuity;

/* Bump f(E) = (1 - ((E - centre) / width)^2)^2 on |E - centre| < width. */
IDSA_API idsa_status idsa_continuity_gap(const idsa_operator* h, const idsa_operator* g,
                                         const idsa_colouring* c, const idsa_subset* u, double eps,
                                         double centre, double width, double tau, idsa_continuity* out);

/* All eigenvalues of H[Q] with multiplicity, ascending. */
IDSA_API idsa_status idsa_eigenvalues(const idsa_operator* op, const idsa_colouring* c, const idsa_subset* q,
                                      double tau, double* values, size_t capacity, size_t* count);

/* Eigenvalue clusters of H[Q] (members closer than tau merged): smallest
 * member and multiplicity. */
IDSA_API idsa_status idsa_eigenvalue_clusters(const idsa_operator* op, const idsa_colouring* c,
                                              const idsa_subset* q, double tau, double* lambdas,
                                              size_t* multiplicities, size_t capacity, size_t* count);

/* Writes H[Q] in MatrixMarket coordinate real symmetric format. */
IDSA_API idsa_status idsa_export_matrix_market(const idsa_operator* op, const idsa_colouring* c,
                                               const idsa_subset* q, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* IDSA_IDSA_H */
