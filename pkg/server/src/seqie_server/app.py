"""FastAPI application exposing the generation wire protocol.

POST /v1/generate  {"items":[{"question","context"},...],"num_beams","max_new_tokens"}
                   -> {"items":[{"text","score"},...]}  (counts preserved)
POST /v1/tokenize  {"texts":[...]} -> {"counts":[...]}
GET  /v1/health    -> {"status":"ok","model":"<name>"}

Malformed requests get a 400 with a reason. The engine sees at most
max_batch_size pairs at a time; responses are reassembled in request order.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .engines import Engine


class GenerateItem(BaseModel):
    question: str
    context: str


class GenerateRequest(BaseModel):
    items: list[GenerateItem]
    num_beams: int = Field(default=5, ge=1)
    max_new_tokens: int = Field(default=256, ge=1)


class AnswerItem(BaseModel):
    text: str
    score: float


class GenerateResponse(BaseModel):
    items: list[AnswerItem]


class TokenizeRequest(BaseModel):
    texts: list[str]


class TokenizeResponse(BaseModel):
    counts: list[int]


def create_app(engine: Engine, max_batch_size: int = 16) -> FastAPI:
    app = FastAPI(title="seqie-server")

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "malformed request",
                                     "reason": exc.errors()})

    @app.post("/v1/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        pairs = [(i.question, i.context) for i in request.items]
        answers = []
        for start in range(0, len(pairs), max_batch_size):
            answers.extend(engine.generate(
                pairs[start:start + max_batch_size],
                num_beams=request.num_beams,
                max_new_tokens=request.max_new_tokens,
            ))
        return GenerateResponse(
            items=[AnswerItem(text=a.text, score=a.score) for a in answers]
        )

    @app.post("/v1/tokenize", response_model=TokenizeResponse)
    def tokenize(request: TokenizeRequest) -> TokenizeResponse:
        return TokenizeResponse(counts=engine.count_tokens(request.texts))

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "model": engine.name}

    return app
