import json

from app.config import parse_config
from app.util import text
import lib


def main():
    cfg = parse_config("cfg.json")
    run(cfg)
    return lib.wrap(cfg)


def run(cfg):
    body = text.normalize(cfg)
    print(body)
    return json.dumps(body)
