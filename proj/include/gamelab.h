/* gamelab C API: board-game text corpora, WordPiece tokenization, masked
 * language model training, and tournament evaluation behind a C ABI.
 *
 * Every function returns a gml_status; gml_last_error() describes the most
 * recent failure on the calling thread. Opaque handles are created and
 * released with their matching _free function.
 */
#ifndef GAMELAB_H
#define GAMELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GML_API __declspec(dllexport)
#else
#define GML_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gml_status {
  GML_OK = 0,
  GML_ERR_ARGUMENT = 1,
  GML_ERR_IO = 2,
  GML_ERR_PARSE = 3,
  GML_ERR_ENGINE = 4,
  GML_ERR_TRAINING = 5,
  GML_ERR_STATE = 6,
  GML_ERR_INTERNAL = 7
} gml_status;

GML_API const char* gml_status_name(gml_status status);
GML_API const char* gml_last_error(void); /* thread-local; "" when clear */
GML_API const char* gml_version(void);

/* --- Nim primitives ------------------------------------------------------ */

typedef struct gml_nim_state {
  int32_t piles[3];
} gml_nim_state;

typedef struct gml_nim_move {
  int32_t pile; /* 0=a, 1=b, 2=c */
  int32_t take;
} gml_nim_move;

GML_API int32_t gml_nim_sum(const gml_nim_state* state);
GML_API gml_status gml_nim_guru_move(const gml_nim_state* state, gml_nim_move* out_move);
GML_API gml_status gml_nim_apply(const gml_nim_state* state, const gml_nim_move* move,
                                 gml_nim_state* out_state);

/* --- Chess primitives ----------------------------------------------------- */

typedef struct gml_position gml_position; /* opaque */

GML_API gml_status gml_position_from_fen(const char* fen, gml_position** out_position);
GML_API gml_status gml_position_start(gml_position** out_position);
GML_API gml_status gml_position_fen(const gml_position* position, char* buffer, size_t capacity);
/* Space-separated coordinate moves; empty string for terminal positions. */
GML_API gml_status gml_position_legal_moves(const gml_position* position, char* buffer,
                                            size_t capacity);
GML_API gml_status gml_position_apply(gml_position* position, const char* move);
GML_API gml_status gml_position_perft(const gml_position* position, int32_t depth,
                                      uint64_t* out_nodes);
GML_API void gml_position_free(gml_position* position);

/* --- shared configuration blocks ----------------------------------------- */

typedef struct gml_engine_config {
  const char* path;          /* UCI engine executable */
  int32_t threads;           /* <= 0 -> 1 */
  int32_t multipv;           /* <= 0 -> 1 */
  int32_t depth;             /* <= 0 -> 1 */
  int32_t elo;               /* <= 0 -> no strength limit requested */
  int64_t movetime_ms;       /* <= 0 -> fixed depth search */
  int32_t handshake_timeout_ms; /* <= 0 -> 10000 */
  int32_t move_timeout_ms;      /* <= 0 -> 120000 */
} gml_engine_config;

typedef struct gml_model_config {
  int32_t layers;   /* <= 0 -> 4 */
  int32_t heads;    /* <= 0 -> 4 */
  int32_t hidden;   /* <= 0 -> 128 */
  int32_t ffn;      /* <= 0 -> 512 */
  int32_t max_seq;  /* <= 0 -> 32 (nim) / 128 (chess) */
  double dropout;   /* < 0 -> 0.0 */
} gml_model_config;

typedef struct gml_train_options {
  double mask_p;      /* <= 0 -> 0.15 */
  int32_t batch_size; /* <= 0 -> 32 */
  int32_t epochs;     /* <= 0 -> 10 */
  int64_t steps;      /* > 0 overrides epochs */
  double lr;          /* <= 0 -> 5e-4 */
  double warmup_frac; /* < 0 -> 0.1 */
  uint64_t seed;
} gml_train_options;

/* --- corpus generation ----------------------------------------------------- */

typedef struct gml_nim_gen_config {
  int64_t games;            /* <= 0 -> 30000 */
  int32_t win_state_tags;   /* 0: player-id G/Q/R tags, 1: W/X winner tags */
  double noise;             /* [0,1] */
  uint64_t seed;
  int32_t randomized_starts; /* default (0) means ON; pass -1 to disable */
  int32_t shuffle_labels;    /* default (0) means ON; pass -1 to disable */
  const char* schedule;      /* "GR,GQ,QR" pairings; NULL -> that default */
  int64_t q_episodes;        /* <= 0 -> 300000 */
  int32_t max_pile;          /* <= 0 -> 10 */
} gml_nim_gen_config;

/* Writes the corpus, a stats JSON, and "<corpus>.manifest.json". The stats
 * path may be NULL to skip the JSON file. */
GML_API gml_status gml_nim_generate(const gml_nim_gen_config* config, const char* out_corpus,
                                    const char* out_stats_json);

typedef struct gml_chess_gen_config {
  gml_engine_config engine;
  int64_t games;          /* <= 0 -> 100 */
  int32_t plies_per_game; /* <= 0 -> 6 */
  int32_t ply_limit;      /* <= 0 -> 200 */
  uint64_t seed;
} gml_chess_gen_config;

GML_API gml_status gml_chess_generate(const gml_chess_gen_config* config,
                                      const char* out_corpus, const char* out_stats_json);

/* --- corpus measurement ---------------------------------------------------- */

/* Stats JSON is written to out_stats_json (optional) and copied into buffer
 * (optional). */
GML_API gml_status gml_dataset_stats(const char* corpus_path, const char* out_stats_json,
                                     char* buffer, size_t capacity);

GML_API gml_status gml_split_corpus(const char* corpus_path, double test_fraction,
                                    uint64_t seed, const char* out_train, const char* out_test);

/* --- tokenizer -------------------------------------------------------------- */

typedef struct gml_tok_train_config {
  const char* const* corpus_paths;
  size_t corpus_count;
  int32_t max_vocab;      /* <= 0 -> 200 */
  int32_t min_frequency;  /* <= 0 -> 2 */
} gml_tok_train_config;

GML_API gml_status gml_tok_train(const gml_tok_train_config* config, const char* out_vocab_json);

/* --- masked language model --------------------------------------------------- */

typedef struct gml_mlm_train_config {
  const char* corpus_path;
  const char* vocab_path;  /* trained WordPiece vocab JSON */
  gml_model_config model;
  gml_train_options train;
  double test_fraction;    /* 0 -> 0.2; pass a negative value to keep every line */
} gml_mlm_train_config;

/* Writes the checkpoint, a per-step loss CSV (optional), and, when a test
 * fraction is held out, "<checkpoint>.heldout.txt" with the held-out lines. */
GML_API gml_status gml_mlm_train(const gml_mlm_train_config* config, const char* out_checkpoint,
                                 const char* out_loss_csv);

typedef struct gml_model gml_model; /* opaque: checkpoint + vocab */

GML_API gml_status gml_model_load(const char* checkpoint_path, const char* vocab_path,
                                  gml_model** out_model);
GML_API void gml_model_free(gml_model* model);

/* Top-1 mask fill for a text with exactly one [MASK]. */
GML_API gml_status gml_model_fill_mask(const gml_model* model, const char* text,
                                       char* token_buffer, size_t capacity,
                                       double* out_probability);

/* Central-finite-difference gradient verification on a tiny double-precision
 * model; writes the max relative error. */
GML_API gml_status gml_mlm_gradient_check(const gml_model_config* config, int32_t vocab_size,
                                          uint64_t seed, double* out_max_rel_error);

/* --- arena / experiments ----------------------------------------------------- */

typedef struct gml_nim_arena_config {
  const double* noise_levels; /* NULL -> 0.0 .. 1.0 step 0.1 */
  size_t noise_level_count;
  int64_t games_per_pairing;  /* <= 0 -> 1000 */
  int64_t corpus_games;       /* <= 0 -> 2000 */
  int64_t q_episodes;         /* <= 0 -> 300000 */
  const char* id_model_tags;  /* NULL -> "GQR" */
  int32_t include_win_state;  /* default (0) means ON; pass -1 to disable */
  int32_t include_base_pairings; /* default (0) means ON; pass -1 to disable */
  gml_model_config model;
  gml_train_options train;
  int32_t tok_max_vocab;
  int32_t tok_min_frequency;
  double test_fraction;
  uint64_t seed;
} gml_nim_arena_config;

GML_API gml_status gml_nim_arena(const gml_nim_arena_config* config, const char* out_dir);

typedef struct gml_nim_sweep_config {
  const int32_t* match_sizes; /* NULL -> {10, 50, 100, 300} */
  size_t match_size_count;
  int64_t eval_games;         /* <= 0 -> 1000 */
  gml_model_config model;
  gml_train_options train;
  int32_t tok_max_vocab;
  int32_t tok_min_frequency;
  double test_fraction;
  uint64_t seed;
} gml_nim_sweep_config;

GML_API gml_status gml_nim_sweep(const gml_nim_sweep_config* config, const char* out_dir);

typedef struct gml_chess_eval_config {
  gml_engine_config engine;
  const char* checkpoint_path;
  const char* vocab_path;
  int64_t games;      /* <= 0 -> 20 */
  int32_t ply_limit;  /* <= 0 -> 200 */
  int32_t model_plays_black; /* default white */
  uint64_t seed;
} gml_chess_eval_config;

GML_API gml_status gml_chess_eval(const gml_chess_eval_config* config, const char* out_dir);

/* Re-render the CSV/SVG outputs of a saved *.report.json. */
GML_API gml_status gml_report(const char* report_json_path, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GAMELAB_H */
