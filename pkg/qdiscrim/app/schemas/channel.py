from pydantic import BaseModel, validator
from typing import List


class ChannelFile(BaseModel):
    """
    User-defined channel as stored on disk. Each operator is a list of rows,
    each row a list of [re, im] pairs.
    """
    name: str
    dim: int
    operators: List[List[List[List[float]]]]

    @validator('dim')
    def validate_dim(cls, v):
        if v < 1 or v > 8:
            raise ValueError('Channel dimension must be between 1 and 8')
        return v

    @validator('operators')
    def validate_operators(cls, v, values):
        if not v:
            raise ValueError('A channel needs at least one Kraus operator')
        dim = values.get('dim')
        for k, op in enumerate(v):
            if dim is not None and len(op) != dim:
                raise ValueError(f'Operator {k} has {len(op)} rows, expected {dim}')
            for r, row in enumerate(op):
                if dim is not None and len(row) != dim:
                    raise ValueError(f'Operator {k} row {r} has {len(row)} entries, expected {dim}')
                for entry in row:
                    if len(entry) != 2:
                        raise ValueError(f'Operator {k} row {r}: entries must be [re, im] pairs')
        return v
