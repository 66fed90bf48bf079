#!/usr/bin/env python3
"""
Environment check for the link optimization toolkit
"""

import os
import sys
import subprocess

# pip name -> import name
REQUIRED_PACKAGES = {
    "numpy": "numpy",
    "scipy": "scipy",
    "pandas": "pandas",
    "python-dotenv": "dotenv",
    "dataclasses-json": "dataclasses_json",
    "pytest": "pytest",
}

ENV_VARS = {
    "LINKOPT_LOG_LEVEL": "INFO",
    "LINKOPT_WORKERS": "1",
    "LINKOPT_OUTPUT_DIR": "results",
    "LINKOPT_DEFAULT_SEED": "7",
}


def check_python_version():
    """Check if Python version is compatible"""
    if sys.version_info < (3, 8):
        print("❌ Python 3.8 or higher is required")
        return False
    print(f"✅ Python {sys.version_info.major}.{sys.version_info.minor} detected")
    return True


def check_dependencies():
    """Check if required packages are installed"""
    missing_packages = []

    for package, module in REQUIRED_PACKAGES.items():
        try:
            __import__(module)
            print(f"✅ {package}")
        except ImportError:
            print(f"❌ {package} - Missing")
            missing_packages.append(package)

    if missing_packages:
        print(f"\n📦 Installing missing packages: {', '.join(missing_packages)}")
        try:
            subprocess.check_call([sys.executable, '-m', 'pip', 'install'] + missing_packages)
            print("✅ All packages installed successfully")
        except subprocess.CalledProcessError:
            print("❌ Failed to install packages. Please run: pip install -r requirements.txt")
            return False

    return True


def check_environment_variables():
    """Report the LINKOPT_* settings; all of them have defaults"""
    print("\n🔧 Environment Variables Check:")
    for var, default in ENV_VARS.items():
        value = os.getenv(var)
        if value:
            print(f"✅ {var}={value}")
        else:
            print(f"⚠️  {var} not set, using {default}")


def check_output_directory():
    output_dir = os.getenv("LINKOPT_OUTPUT_DIR", ENV_VARS["LINKOPT_OUTPUT_DIR"])
    print("\n📁 Output Directory Check:")
    if os.path.isdir(output_dir):
        print(f"✅ {output_dir} ({len(os.listdir(output_dir))} files)")
    else:
        os.makedirs(output_dir, exist_ok=True)
        print(f"✅ Created {output_dir}")


def create_env_template():
    """Create a template .env file"""
    lines = ["# Link optimization toolkit settings", ""]
    lines += [f"{var}={default}" for var, default in ENV_VARS.items()]
    env_template = "\n".join(lines) + "\n"

    if not os.path.exists('.env'):
        with open('.env', 'w') as f:
            f.write(env_template)
        print("✅ Created .env template file")
    else:
        print("✅ .env file already exists")


def main():
    """Main setup function"""
    print("🔍 Link Optimization Toolkit Setup")
    print("=" * 50)

    if not check_python_version():
        sys.exit(1)

    print("\n📦 Dependencies Check:")
    if not check_dependencies():
        sys.exit(1)

    print("\n🔧 Environment Setup:")
    create_env_template()
    check_environment_variables()
    check_output_directory()

    print("\n" + "=" * 50)
    print("🎉 Setup Complete!")
    print("\nNext steps:")
    print("1. Run: python cli.py validate")
    print("2. Run: python cli.py sweep --param k --values 20,60,100 --drops 20 --out results/k.csv")
    print("\nFor more information, see README.md")


if __name__ == "__main__":
    main()
