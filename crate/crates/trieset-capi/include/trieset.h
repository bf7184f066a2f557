#ifndef TRIESET_H
#define TRIESET_H

/* Generated from the trieset-capi Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum trieset_status {
  TRIESET_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TRIESET_ERR_NULL_ARGUMENT = 1,
  /**
   * Malformed input: unsorted elements, out-of-range values, bad sizes.
   */
  TRIESET_ERR_INVALID_INPUT = 2,
  /**
   * The operation needs a directory the handle was built without.
   */
  TRIESET_ERR_MISSING_DIRECTORY = 3,
  /**
   * A query mixed plain-trie and run-trie sets.
   */
  TRIESET_ERR_MIXED_KINDS = 4,
  /**
   * An intersection was asked for fewer than two sets.
   */
  TRIESET_ERR_TOO_FEW_SETS = 5,
  /**
   * A set name is not present in the family.
   */
  TRIESET_ERR_UNKNOWN_SET = 6,
  /**
   * A text corpus failed to parse.
   */
  TRIESET_ERR_PARSE = 7,
  /**
   * A binary payload is malformed.
   */
  TRIESET_ERR_FORMAT = 8,
  /**
   * An underlying I/O operation failed.
   */
  TRIESET_ERR_IO = 9,
  /**
   * A string argument was not valid UTF-8.
   */
  TRIESET_ERR_UTF8 = 10,
  /**
   * The caller's buffer is too small; the required size was reported.
   */
  TRIESET_ERR_BUFFER_TOO_SMALL = 11,
  /**
   * An internal panic was caught at the boundary.
   */
  TRIESET_ERR_PANIC = 12,
} trieset_status;

/**
 * A named collection of sets sharing one universe.
 */
typedef struct trieset_family trieset_family;

/**
 * An immutable set stored as a run-compressed binary trie.
 */
typedef struct trieset_rtrie trieset_rtrie;

/**
 * An immutable set stored as a level-wise binary trie.
 */
typedef struct trieset_trie trieset_trie;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the calling thread's most recent failure. Never null; empty
 * before the first failure. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *trieset_last_error(void);

/**
 * Library version as a static string.
 */
const char *trieset_version(void);

/**
 * Builds a plain-trie set from `n` strictly increasing elements below
 * `universe`. `with_ranks` enables `trieset_trie_rank`; `with_select`
 * additionally speeds up `trieset_trie_select`.
 *
 * # Safety
 * `elems` must point to `n` readable `uint64_t` values (or be null when
 * `n == 0`); `out` must be a valid destination pointer.
 */
enum trieset_status trieset_trie_build(const uint64_t *elems,
                                       size_t n,
                                       uint64_t universe,
                                       bool with_ranks,
                                       bool with_select,
                                       struct trieset_trie **out);

/**
 * Releases a trie handle. Null is a no-op.
 *
 * # Safety
 * `t` must be a pointer previously returned through `trieset_trie_build`
 * and not freed since.
 */
void trieset_trie_free(struct trieset_trie *t);

/**
 * Number of elements; 0 for null.
 *
 * # Safety
 * `t` must be a live trie handle or null.
 */
uint64_t trieset_trie_len(const struct trieset_trie *t);

/**
 * Universe size the set was built over; 0 for null.
 *
 * # Safety
 * `t` must be a live trie handle or null.
 */
uint64_t trieset_trie_universe(const struct trieset_trie *t);

/**
 * Copies the elements in increasing order into `buf`. `*written` always
 * receives the element count, so a `TRIESET_ERR_BUFFER_TOO_SMALL` reply
 * doubles as a size query (pass `cap == 0`).
 *
 * # Safety
 * `t` must be a live trie handle; `buf` must have room for `cap` values;
 * `written` must be a valid destination pointer.
 */
enum trieset_status trieset_trie_decode(const struct trieset_trie *t,
                                        uint64_t *buf,
                                        size_t cap,
                                        size_t *written);

/**
 * Number of elements `<= x`. Requires a handle built `with_ranks`.
 *
 * # Safety
 * `t` must be a live trie handle; `out` must be a valid destination.
 */
enum trieset_status trieset_trie_rank(const struct trieset_trie *t, uint64_t x, uint64_t *out);

/**
 * The `j`-th smallest element, 1-based.
 *
 * # Safety
 * `t` must be a live trie handle; `out` must be a valid destination.
 */
enum trieset_status trieset_trie_select(const struct trieset_trie *t, uint64_t j, uint64_t *out);

/**
 * Smallest element `>= x`. `*found` reports whether one exists; `*out` is
 * written only when it does.
 *
 * # Safety
 * `t` must be a live trie handle; `out` and `found` must be valid
 * destinations.
 */
enum trieset_status trieset_trie_successor(const struct trieset_trie *t,
                                           uint64_t x,
                                           uint64_t *out,
                                           bool *found);

/**
 * Largest element `<= x`. Same contract as [`trieset_trie_successor`].
 *
 * # Safety
 * `t` must be a live trie handle; `out` and `found` must be valid
 * destinations.
 */
enum trieset_status trieset_trie_predecessor(const struct trieset_trie *t,
                                             uint64_t x,
                                             uint64_t *out,
                                             bool *found);

/**
 * Releases an element array returned by one of the intersection calls.
 * `ptr` may be null when `len == 0`.
 *
 * # Safety
 * `ptr`/`len` must be exactly the pair reported by the producing call.
 */
void trieset_elements_free(uint64_t *ptr, size_t len);

/**
 * Intersects `k >= 2` plain-trie sets over one universe. On success the
 * library allocates `*out`/`*out_len`; release with
 * [`trieset_elements_free`].
 *
 * # Safety
 * `tries` must point to `k` live trie handles; `out` and `out_len` must
 * be valid destinations.
 */
enum trieset_status trieset_intersect(const struct trieset_trie *const *tries,
                                      size_t k,
                                      uint64_t **out,
                                      size_t *out_len);

/**
 * Builds a run-trie set; `with_ranks` enables `trieset_rtrie_rank`.
 *
 * # Safety
 * Same contract as [`trieset_trie_build`].
 */
enum trieset_status trieset_rtrie_build(const uint64_t *elems,
                                        size_t n,
                                        uint64_t universe,
                                        bool with_ranks,
                                        struct trieset_rtrie **out);

/**
 * Releases a run-trie handle. Null is a no-op.
 *
 * # Safety
 * `t` must be a pointer previously returned through
 * `trieset_rtrie_build` and not freed since.
 */
void trieset_rtrie_free(struct trieset_rtrie *t);

/**
 * Number of elements; 0 for null.
 *
 * # Safety
 * `t` must be a live run-trie handle or null.
 */
uint64_t trieset_rtrie_len(const struct trieset_rtrie *t);

/**
 * Universe size the set was built over; 0 for null.
 *
 * # Safety
 * `t` must be a live run-trie handle or null.
 */
uint64_t trieset_rtrie_universe(const struct trieset_rtrie *t);

/**
 * Copies the elements in increasing order; same contract as
 * [`trieset_trie_decode`].
 *
 * # Safety
 * Same contract as [`trieset_trie_decode`].
 */
enum trieset_status trieset_rtrie_decode(const struct trieset_rtrie *t,
                                         uint64_t *buf,
                                         size_t cap,
                                         size_t *written);

/**
 * Membership test.
 *
 * # Safety
 * `t` must be a live run-trie handle; `out` must be a valid destination.
 */
enum trieset_status trieset_rtrie_contains(const struct trieset_rtrie *t, uint64_t x, bool *out);

/**
 * Number of elements `<= x`. Requires a handle built `with_ranks`.
 *
 * # Safety
 * `t` must be a live run-trie handle; `out` must be a valid destination.
 */
enum trieset_status trieset_rtrie_rank(const struct trieset_rtrie *t, uint64_t x, uint64_t *out);

/**
 * Largest element `<= x`; same contract as [`trieset_trie_predecessor`].
 *
 * # Safety
 * Same contract as [`trieset_trie_predecessor`].
 */
enum trieset_status trieset_rtrie_predecessor(const struct trieset_rtrie *t,
                                              uint64_t x,
                                              uint64_t *out,
                                              bool *found);

/**
 * Intersects `k >= 2` run-trie sets; same contract as
 * [`trieset_intersect`].
 *
 * # Safety
 * Same contract as [`trieset_intersect`].
 */
enum trieset_status trieset_rtrie_intersect(const struct trieset_rtrie *const *tries,
                                            size_t k,
                                            uint64_t **out,
                                            size_t *out_len);

/**
 * Parses a text corpus (`name: v1 v2 ...` lines, `#` comments) into a
 * family of tries. `run_tries` selects the run-compressed representation;
 * `universe` fixes the universe, or infers it from the data when 0.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid
 * destination pointer.
 */
enum trieset_status trieset_family_from_text(const char *text,
                                             bool run_tries,
                                             uint64_t universe,
                                             struct trieset_family **out);

/**
 * Loads a family container from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid
 * destination pointer.
 */
enum trieset_status trieset_family_load(const char *path, struct trieset_family **out);

/**
 * Writes a family container to a file, replacing any existing content.
 *
 * # Safety
 * `f` must be a live family handle; `path` must be a NUL-terminated
 * string.
 */
enum trieset_status trieset_family_save(const struct trieset_family *f, const char *path);

/**
 * Releases a family handle. Null is a no-op.
 *
 * # Safety
 * `f` must be a pointer previously returned by a family constructor and
 * not freed since.
 */
void trieset_family_free(struct trieset_family *f);

/**
 * Number of member sets; 0 for null.
 *
 * # Safety
 * `f` must be a live family handle or null.
 */
size_t trieset_family_count(const struct trieset_family *f);

/**
 * Shared universe size; 0 for null.
 *
 * # Safety
 * `f` must be a live family handle or null.
 */
uint64_t trieset_family_universe(const struct trieset_family *f);

/**
 * Name of the `i`-th set, or null when `i` is out of range. The pointer
 * stays valid while the family handle lives.
 *
 * # Safety
 * `f` must be a live family handle or null.
 */
const char *trieset_family_name(const struct trieset_family *f, size_t i);

/**
 * Number of elements in the named set.
 *
 * # Safety
 * `f` must be a live family handle; `name` must be NUL-terminated; `out`
 * must be a valid destination.
 */
enum trieset_status trieset_family_set_len(const struct trieset_family *f,
                                           const char *name,
                                           uint64_t *out);

/**
 * Intersects `k >= 2` member sets by name with `threads` workers
 * (0 uses all available cores). Allocation contract as
 * [`trieset_intersect`].
 *
 * # Safety
 * `names` must point to `k` NUL-terminated strings; `out` and `out_len`
 * must be valid destinations.
 */
enum trieset_status trieset_family_intersect(const struct trieset_family *f,
                                             const char *const *names,
                                             size_t k,
                                             size_t threads,
                                             uint64_t **out,
                                             size_t *out_len);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TRIESET_H */
