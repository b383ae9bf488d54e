# --- Output Files ---
MODEL_FILE = "model.json"
REPORT_FILE = "report.csv"
LAMBDA_RANKING_FILE = "lambda_ranking.csv"
IDF_RANKING_FILE = "idf_ranking.csv"

# --- Column Definitions ---
COLS_CORPUS = ["id", "label", "text"]
COLS_REPORT = ["size", "kind", "mean_error", "std_error", "repeats", "seed"]
COLS_RANKED = ["rank", "term", "score"]
COLS_BENCH = ["n", "partition_ms", "gradient_ms"]
COLS_VOCAB = ["index", "term", "df", "count"]
COLS_PROFILE = ["lambda_1", "x_1", "inverse_volume", "distance_from_corner"]

CORPUS_FORMATS = ["dir", "jsonl"]

# --- Numerical Settings ---
SIMPLEX_TOL = 1e-9
FFT_THRESHOLD = 64          # series length at which convolution switches to FFT
BRUTEFORCE_MAX_TERMS = 10**6
MAX_BACKTRACKS = 60
GRAD_TOL = 1e-10

# --- Embedding Settings ---
DEFAULT_ALPHA = 0.01
DEFAULT_MIN_COUNT = 1
DEFAULT_PAD = True
PAD_TERM = "<pad>"          # never produced by the tokenizer

# --- Optimizer Settings ---
DEFAULT_STEP = 1.0
DEFAULT_BACKTRACK = 0.5
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 500
DEFAULT_SEED = 0

# --- Evaluation Settings ---
DISTANCE_KINDS = ["learned", "fisher", "tfidf", "l2"]
DEFAULT_KINDS = ["learned", "tfidf", "l2"]
DEFAULT_SIZES = [20, 40, 80]
DEFAULT_REPEATS = 20
DEFAULT_NEIGHBORS = 1
DEFAULT_TOP_K = 10

# --- Profile Settings (inverse volume and distance on P_1) ---
PROFILE_LAMBDAS = [(0.5, 0.5), (1 / 3, 2 / 3), (1 / 6, 5 / 6), (0.0099, 0.9901)]
PROFILE_GRID = 199

# --- Model File ---
FORMAT_VERSION = 1

# --- Exit Codes ---
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

# --- CLI Settings ---
APP_TITLE = "simplex-metric"
APP_SUBTITLE = "Learned Riemannian metrics on the multinomial simplex for text"
