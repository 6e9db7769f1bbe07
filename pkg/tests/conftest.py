"""Shared fixtures: the marriage-law toy corpus, a 50-article synthetic
corpus for retrieval checks, and deterministic clocks/backends."""

import random
import time

import pytest

from lexlab.corpus import Article, ArticleIndex
from lexlab.retrieval import LexicalIndex

_SUITE_START = time.monotonic()

# Civil Code marriage/family articles used across the suite (the "toy index").
MARRIAGE_ARTICLES = [
    ("民法典", 26, "父母对未成年子女负有抚养、教育和保护的义务。成年子女对父母负有赡养、扶助和保护的义务。"),
    ("民法典", 304, "共有人可以协商确定分割方式。达不成协议，共有的不动产或者动产可以分割并且不会因分割减损价值的，应当对实物予以分割。"),
    ("民法典", 1046, "结婚应当男女双方完全自愿，禁止任何一方对另一方加以强迫，禁止任何组织或者个人加以干涉。"),
    ("民法典", 1047, "结婚年龄，男不得早于二十二周岁，女不得早于二十周岁。"),
    ("民法典", 1048, "直系血亲或者三代以内的旁系血亲禁止结婚。"),
    ("民法典", 1049, "要求结婚的男女双方应当亲自到婚姻登记机关申请结婚登记。符合本法规定的，予以登记，发给结婚证。"),
    ("民法典", 1051, "有下列情形之一的，婚姻无效：（一）重婚；（二）有禁止结婚的亲属关系；（三）未到法定婚龄。"),
    ("民法典", 1072, "继父母与继子女间的权利义务关系，适用本法关于父母子女关系的规定。"),
    ("民法典", 1080, "完成离婚登记，或者离婚判决书、调解书生效，即解除婚姻关系。"),
    ("民法典", 1083, "离婚后，男女双方自愿恢复婚姻关系的，应当到婚姻登记机关重新进行结婚登记。"),
    ("民法典", 1098, "收养人应当同时具备下列条件：（一）无子女或者只有一名子女；（二）有抚养、教育和保护被收养人的能力；（五）年满三十周岁。"),
    ("民法典", 1103, "继父或者继母经继子女的生父母同意，可以收养继子女。"),
]

# Word pools for the synthetic 50-article corpus; five fake laws with
# partially overlapping legal boilerplate so BM25 statistics are non-trivial.
_SHARED_WORDS = ["应当", "不得", "可以", "禁止", "责任", "规定", "处罚", "监督", "管理", "申请"]
_LAW_POOLS = {
    "数据安全条例": ["数据", "网络", "信息", "加密", "存储", "备份", "泄露", "系统", "账号", "审计"],
    "道路交通办法": ["车辆", "驾驶", "道路", "信号", "超速", "停车", "行人", "载货", "牌照", "事故"],
    "食品卫生条例": ["食品", "卫生", "添加", "生产", "包装", "标签", "检验", "冷藏", "过期", "召回"],
    "劳动合同细则": ["劳动", "合同", "工资", "加班", "解除", "赔偿", "试用", "社保", "休假", "培训"],
    "环境保护办法": ["环境", "污染", "排放", "噪声", "废水", "固废", "治理", "生态", "绿化", "评估"],
}


def make_marriage_articles() -> list[Article]:
    return [
        Article(law_title=title, article_no=no, text=text, source_id=f"fixture-{no}")
        for title, no, text in MARRIAGE_ARTICLES
    ]


def make_synthetic_corpus(seed: int = 20240720) -> tuple[list[Article], list[str]]:
    """50 deterministic articles over five fake laws, plus 20 queries mixing
    their vocabularies."""
    rng = random.Random(seed)
    articles = []
    for law, pool in _LAW_POOLS.items():
        for no in range(1, 11):
            words = rng.choices(pool, k=rng.randint(8, 16)) + rng.choices(
                _SHARED_WORDS, k=rng.randint(3, 6)
            )
            rng.shuffle(words)
            text = "，".join("".join(words[i : i + 3]) for i in range(0, len(words) - 2, 3)) + "。"
            articles.append(Article(law_title=law, article_no=no, text=text))
    all_pools = [w for pool in _LAW_POOLS.values() for w in pool] + _SHARED_WORDS
    queries = ["".join(rng.sample(all_pools, rng.randint(2, 5))) for _ in range(20)]
    return articles, queries


@pytest.fixture(scope="session")
def marriage_index() -> ArticleIndex:
    return ArticleIndex(make_marriage_articles())


@pytest.fixture(scope="session")
def marriage_lexical(marriage_index) -> LexicalIndex:
    return LexicalIndex.build(marriage_index)


@pytest.fixture(scope="session")
def synthetic_corpus() -> tuple[list[Article], list[str]]:
    return make_synthetic_corpus()


@pytest.fixture(scope="session")
def synthetic_index(synthetic_corpus) -> ArticleIndex:
    return ArticleIndex(synthetic_corpus[0])


@pytest.fixture(scope="session")
def synthetic_lexical(synthetic_index) -> LexicalIndex:
    return LexicalIndex.build(synthetic_index)


class TickingClock:
    """Deterministic clock: each call advances by a fixed step."""

    def __init__(self, start: float = 1000.0, step: float = 1.0):
        self.now = start
        self.step = step

    def __call__(self) -> float:
        value = self.now
        self.now += self.step
        return value


@pytest.fixture
def ticking_clock() -> TickingClock:
    return TickingClock()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.monotonic() - _SUITE_START
    status = "PASS" if (exitstatus == 0 and elapsed < 120.0) else "FAIL"
    terminalreporter.write_line(
        f"[ACCEPTANCE] A10 offline-suite-under-2min: {status} "
        f"({elapsed:.1f}s elapsed, mock backends only)"
    )
