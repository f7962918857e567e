class Scaler {
public:
  long scale(int value){
    int factor = 3;
    return value * factor;
  }
};
