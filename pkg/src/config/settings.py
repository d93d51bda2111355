from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    NOMA_VLC_THREADS: int = 0
    LOG_LEVEL: str = "INFO"
    PORT: int = 8000

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"
