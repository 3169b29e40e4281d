"""
Basic List Repository
basic_lists.jsonl: one {"session_id", "model_id", "items": [{"item_id", "score"}]} per line
"""
import json
import logging
from pathlib import Path
from typing import Union

from ...domain.exceptions import IntelValidationError
from ...domain.repositories.idataset_repository import IBasicListRepository
from ...domain.value_objects.basic_lists import BasicListSet, ScoredItem

logger = logging.getLogger(__name__)


class JsonlBasicListRepository(IBasicListRepository):
    """JSON-lines storage of basic-model lists"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def load(self) -> BasicListSet:
        if not self.path.exists():
            raise IntelValidationError(f"Basic list file not found: {self.path}")
        lists = BasicListSet(model_ids=())
        with open(self.path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    items = [ScoredItem(str(i["item_id"]), float(i["score"])) for i in record["items"]]
                    lists.add(str(record["session_id"]), str(record["model_id"]), items)
                except (KeyError, TypeError, ValueError) as e:
                    raise IntelValidationError(f"{self.path} line {line_number}: {e}") from e
        logger.info(f"Read {len(lists.lists)} basic lists for models {list(lists.model_ids)}")
        return lists

    def save(self, lists: BasicListSet) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8", newline="\n") as f:
            for (session_id, model_id) in sorted(lists.lists):
                record = {
                    "session_id": session_id,
                    "model_id": model_id,
                    "items": [
                        {"item_id": item.item_id, "score": item.score}
                        for item in lists.lists[(session_id, model_id)]
                    ],
                }
                f.write(json.dumps(record) + "\n")
        logger.info(f"Wrote {len(lists.lists)} basic lists to {self.path}")
