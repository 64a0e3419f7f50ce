from tfmonad.main import main

main()
