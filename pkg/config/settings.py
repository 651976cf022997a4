"""
시뮬레이션 설정

화학 오토마타(FA / PDA / TM) 기본 물리 상수와 레시피.
단위는 이름 뒤 접미사로 표기한다 (_S: 초, _M: mol/dm3, _DM3: dm3, _MOL: mol, _K: 켈빈).
"""

# 설정 파일 스키마 버전 (TOML schema_version 과 일치해야 함)
SCHEMA_VERSION = 1

# 열역학 데이터 디렉터리를 덮어쓰는 환경변수
DATA_DIR_ENV = "CHEMAUTOMATA_DATA_DIR"

# 진입점 (src/cli/app.py, src/engine/main.py) 공통 로그 형식
LOG_FORMAT = "[%(asctime)s] %(name)s - %(levelname)s - %(message)s"

# 물리 상수
GAS_CONSTANT = 8.314462618   # J/(mol K)
FARADAY = 96485.33212        # C/mol
TEMPERATURE_K = 298.15       # 등온 반응기 온도

# 피드 스케줄
TAU_S = 300.0                # 기호 사이 간격
TRANSIENT_DISCARD_S = 30.0   # 면적 적분에서 버리는 초기 과도 구간
TM_SAMPLE_DT_S = 0.5         # BZ 샘플링 간격
SAMPLES_PER_INTERVAL = 10    # 비진동 모델: tau/10 간격 샘플

# 적분기 허용오차
RTOL = 1e-6
ATOL_SCALE_M = 1e-6          # atol = rtol * ATOL_SCALE_M
NEGATIVE_TOL_M = 1e-12       # 이보다 더 음수로 내려가는 스텝은 거부
INTEGRATOR_RETRIES = 2       # 음수 언더슈트 시 rtol 을 1/10 로 줄여 재시도하는 횟수

# --- FA: 침전 반응 (KIO3 + AgNO3 -> AgIO3) ---
KSP_AGIO3 = 3.17e-8          # M^2
VISIBILITY_MOL = 1e-6        # "보이는 침전" 임계값
FA_REACTOR_VOLUME_DM3 = 0.1  # 초기 물 부피
FA_ALIQUOT_VOLUME_DM3 = 0.01
FA_ALIQUOT_CONC_M = 0.1      # a: KIO3, b: AgNO3

# --- PDA: 산-염기 (NaOH = '(', 말론산 = ')', 지시약 = '#') ---
PKA1 = 2.85
PKA2 = 5.70
KW = 1e-14
BAND_EPS = 0.30              # midpoint 주변 허용 폭 (pH)
PDA_REACTOR_VOLUME_DM3 = 0.1
PDA_ALIQUOT_VOLUME_DM3 = 0.01
PDA_ALIQUOT_CONC_M = 0.1     # NaOH 와 말론산 1:1 보정
INDICATOR_MOL = 2e-6         # 메틸레드 (불활성)
METHYL_RED_RED_PH = 4.4      # 이 값 이하 red
METHYL_RED_YELLOW_PH = 6.2   # 이 값 이상 yellow
H_MIN_M = 1e-16              # [H+] 근 탐색 구간
H_MAX_M = 10.0

# --- TM: BZ 진동자 (Oregonator, Ru(bpy)3 촉매) ---
# 속도상수 (Field-Noyes 값, H+ 의존성은 식 안에서 곱함)
BZ_K1 = 2.0                  # A + Y -> X + P          M^-3 s^-1 (H^2 포함)
BZ_K2 = 3.0e6                # X + Y -> 2P             M^-2 s^-1 (H 포함)
BZ_K3 = 42.0                 # A + X + Red -> 2X + 2Z  M^-2 s^-1 (H 포함)
BZ_K4 = 3.0e3                # 2X -> A + P             M^-1 s^-1
BZ_KC = 1.0                  # B + Z -> (f/2) Y        M^-1 s^-1
BZ_STOICH_F = 1.0

# 초기 반응기 (진동 중인 BZ 혼합물)
TM_REACTOR_VOLUME_DM3 = 0.1
TM_BROMATE_M = 0.06
TM_MALONIC_M = 0.10
TM_ACID_M = 0.80
TM_CATALYST_M = 0.05
TM_HBRO2_M = 1e-9
TM_BROMIDE_M = 1e-6
TM_RU3_M = 1e-5

# 알파벳 aliquot (a: NaBrO3, b: 말론산, c: NaOH, #: 촉매)
TM_ALIQUOT_VOLUME_DM3 = 0.002
TM_A_CONC_M = 0.5
TM_B_CONC_M = 1.0
TM_C_CONC_M = 2.0
TM_END_CONC_M = 0.25

# 산화환원 관측
V0_VOLT = 1.0                # 표준전위 (기준전극 대비)
N_ELECTRONS = 1
CATALYST_EPS_M = 1e-9        # V_max = V(C_tot - eps, eps)
NERNST_FLOOR_M = 1e-15       # 0 이하 농도 대체값
PEAK_PROMINENCE_FRAC = 0.05  # (V_max - window min) 대비 최소 prominence

# 반응 엔탈피
NEUTRALIZATION_DH_KJ = -55.89

# --- 튜닝 / 수용 밴드 ---
TUNE_BUDGET = 40             # 목적함수 평가 횟수
TUNE_N_RANGE = (1, 2, 3, 4)
TUNE_INITIAL_STEP = 0.15     # log 농도 공간 초기 simplex 크기
ACCEPT_BAND_PAD_REL = 0.01   # 가까운 reject 가 없는 쪽의 수용 범위 여유 (A* 대비)
SEPARATION_TARGET_REL = 0.005  # 수용 범위와 가장 가까운 reject 사이 목표 간격 (A* 대비)
SEPARATION_WEIGHT = 1.0
SEPARATION_CANDIDATES = 3    # 전체 reject 족으로 분리를 확인할 상위 후보 수
SIGNATURE_N = (2, 3)         # reject 시그니처를 만드는 섭동 족의 n
INFEASIBLE_PENALTY = 1e3

# 출력
SVG_HASH_SALT = "chemical-automata"

# 차분 테스트 기본 최대 길이 (L3 는 큐레이션 집합)
SUITE_MAX_LEN = {"L1": 8, "L2": 10}
