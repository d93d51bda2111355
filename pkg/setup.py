from setuptools import setup, find_packages

setup(
    name="noma-vlc",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "fastapi>=0.109.0",
        "uvicorn>=0.27.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.6.0",
        "pydantic-settings>=2.1.0",
    ],
    extras_require={
        "test": ["pytest>=7.4.0", "httpx>=0.24.0"],
    },
    entry_points={
        "console_scripts": ["noma-vlc=src.cli:main"],
    },
    python_requires=">=3.9",
)
